"""FastAPI routers of the evaluation service"""
