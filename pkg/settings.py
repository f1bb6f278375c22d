import os
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = os.path.dirname(os.path.abspath(__file__))

# --- Runtime model constants ---
SWEEP_TIME_SECONDS = float(os.getenv('SWEEP_TIME_SECONDS', '0.6e-5'))
SHOT_TIME_SECONDS = float(os.getenv('SHOT_TIME_SECONDS', '1e-4'))

# --- Exact oracle / simulator caps ---
BRUTE_FORCE_MAX_VARS = int(os.getenv('BRUTE_FORCE_MAX_VARS', '24'))
SIMULATOR_MAX_QUBITS = int(os.getenv('SIMULATOR_MAX_QUBITS', '24'))

# --- Annealing ---
SA_WORKERS = int(os.getenv('SA_WORKERS', '1'))
SA_DEBUG_CHECK_EVERY = int(os.getenv('SA_DEBUG_CHECK_EVERY', '0'))

# --- BF-DCQO defaults ---
DEFAULT_EFFECTIVE_ANGLE = float(os.getenv('DEFAULT_EFFECTIVE_ANGLE', '-0.4'))
DEFAULT_TRANSVERSE_FIELD = float(os.getenv('DEFAULT_TRANSVERSE_FIELD', '-1.0'))

# --- Topology ---
HERON_LAYOUT_PATH = os.getenv('HERON_LAYOUT_PATH', os.path.join(BASE_DIR, 'data', 'heron_r2_156.json'))

# --- Benchmark queue / output ---
BENCH_QUEUE_PATH = os.getenv('BENCH_QUEUE_PATH', os.path.join(BASE_DIR, 'data', 'bench_queue.sqlite3'))
BENCH_OUTPUT_DIR = os.getenv('BENCH_OUTPUT_DIR', os.path.join(BASE_DIR, 'bench_output'))
BENCH_TASK_TIMEOUT_SECONDS = int(os.getenv('BENCH_TASK_TIMEOUT_SECONDS', '3600'))
BENCH_POLL_INTERVAL_SECONDS = float(os.getenv('BENCH_POLL_INTERVAL_SECONDS', '0.5'))
BENCH_OUTPUT_MAX_AGE_DAYS = int(os.getenv('BENCH_OUTPUT_MAX_AGE_DAYS', '14'))

# --- HTTP ---
SOLVER_RATE_LIMIT = os.getenv('SOLVER_RATE_LIMIT', '30/minute')
FRONTEND_URL = os.getenv('FRONTEND_URL', 'http://localhost:3000')
PORT = int(os.getenv('PORT', '5000'))
