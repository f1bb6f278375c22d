import asyncio
import json
import logging
import time
import uuid
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from slowapi import _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded
from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request as StarletteRequest
from starlette.responses import Response as StarletteResponse

from routes import bench, instances, mip, solvers
from services.bench_queue import get_bench_queue
from settings import BENCH_OUTPUT_DIR, BENCH_OUTPUT_MAX_AGE_DAYS, FRONTEND_URL, PORT
from utils.output_cleanup import cleanup_old_outputs

# Configure Logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

# --- Log Filtering ---
logging.getLogger("uvicorn.access").setLevel(logging.WARNING)


# --- Background Cleanup ---

async def periodic_output_cleanup():
    """Daily: drop old suite outputs and purge completed queue rows."""
    while True:
        try:
            result = cleanup_old_outputs(BENCH_OUTPUT_DIR, max_age_days=BENCH_OUTPUT_MAX_AGE_DAYS)
            if result.get('deleted_count', 0) > 0:
                logging.info(f"Output cleanup: {result}")
            purged = get_bench_queue().purge_completed_jobs(older_than_hours=BENCH_OUTPUT_MAX_AGE_DAYS * 24)
            if purged.get('deleted', 0) > 0:
                logging.info(f"Queue purge: {purged}")
        except Exception as e:
            logging.error(f"Output cleanup error: {e}")
        await asyncio.sleep(24 * 3600)


@asynccontextmanager
async def lifespan(app: FastAPI):
    cleanup_task = asyncio.create_task(periodic_output_cleanup())
    # Suites run in the dedicated worker process (worker.py), not in request handlers.
    try:
        yield
    finally:
        cleanup_task.cancel()
        await asyncio.gather(cleanup_task, return_exceptions=True)


app = FastAPI(title="HUBO Toolkit API", lifespan=lifespan)
app.state.limiter = solvers.limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)

# --- Middleware ---

allowed_origins = [origin.strip() for origin in FRONTEND_URL.split(',')]
app.add_middleware(
    CORSMiddleware,
    allow_origins=allowed_origins,
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["Content-Type", "Authorization"],
)


class RequestMetricsMiddleware(BaseHTTPMiddleware):
    async def dispatch(self, request: StarletteRequest, call_next):
        request_id = request.headers.get("X-Request-ID") or str(uuid.uuid4())
        started_at = time.perf_counter()

        status_code = 500
        try:
            response: StarletteResponse = await call_next(request)
            status_code = response.status_code
            response.headers["X-Request-ID"] = request_id
            return response
        finally:
            payload = {
                "event": "http_request",
                "request_id": request_id,
                "method": request.method,
                "path": request.url.path,
                "status_code": status_code,
                "duration_ms": round((time.perf_counter() - started_at) * 1000, 2),
            }
            logging.info(json.dumps(payload, ensure_ascii=True))


app.add_middleware(RequestMetricsMiddleware)

# --- Register Routes ---
app.include_router(instances.router)
app.include_router(solvers.router)
app.include_router(mip.router)
app.include_router(bench.router)


@app.get("/")
def health_check():
    return {"status": "HUBO Toolkit API is running"}


if __name__ == '__main__':
    import uvicorn
    uvicorn.run("app:app", host='0.0.0.0', port=PORT, reload=False)
