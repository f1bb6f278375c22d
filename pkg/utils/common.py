import logging
from typing import Any, Callable

from fastapi import HTTPException, status
from starlette.concurrency import run_in_threadpool

from core.errors import CapacityError, ToolkitError


def http_error_for(exc: ToolkitError) -> HTTPException:
    """CapacityError -> 413, any other toolkit error -> 400."""
    if isinstance(exc, CapacityError):
        return HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail=str(exc))
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))


async def run_operation(fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    """Runs a blocking toolkit call off the event loop and maps its errors to HTTP responses."""
    try:
        return await run_in_threadpool(fn, *args, **kwargs)
    except ToolkitError as e:
        raise http_error_for(e)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except HTTPException:
        raise
    except Exception as e:
        logging.error(f"Unexpected error in {getattr(fn, '__name__', 'operation')}: {e}", exc_info=True)
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail="Internal server error.")
