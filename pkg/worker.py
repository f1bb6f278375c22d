import asyncio
import logging
import signal

from services.bench_queue import bench_worker_loop, get_bench_queue, get_worker_mode

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


async def main():
    stop_event = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop_event.set)
        except NotImplementedError:
            # Windows event loops; KeyboardInterrupt still ends the run.
            pass

    queue = get_bench_queue()
    logging.info(f"Bench worker starting on {queue.db_path}: mode={get_worker_mode(queue)} "
                 f"jobs={queue.get_status_summary()}")
    try:
        await bench_worker_loop(stop_event, queue)
    except asyncio.CancelledError:
        logging.info("Bench worker cancelled.")
    except Exception:
        logging.exception("Bench worker terminated unexpectedly.")
        raise
    finally:
        logging.info("Bench worker stopped.")


if __name__ == '__main__':
    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        logging.info("Bench worker shutdown requested by KeyboardInterrupt.")
