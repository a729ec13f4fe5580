from contextlib import contextmanager

from fastapi import HTTPException

from ..errors import ShadowError


@contextmanager
def domain_errors():
    """Turn domain failures into HTTP errors carrying the failure witness."""
    try:
        yield
    except ShadowError as e:
        raise HTTPException(
            status_code=e.http_status,
            detail={"error": type(e).__name__, "message": str(e), "witness": e.witness},
        )
