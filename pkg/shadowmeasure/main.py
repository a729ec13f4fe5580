from fastapi import FastAPI

from .routers import couplings, measures, shadows

app = FastAPI(title="Shadow measure API")

app.include_router(measures.router)
app.include_router(shadows.router)
app.include_router(couplings.router)

@app.get("/")
def root():
    return {"message": "Shadow measure API is running"}
