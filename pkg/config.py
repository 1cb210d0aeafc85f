import os

DEFAULT_SEED = int(os.getenv("POWERLOGIT_SEED", "20120101"))
THREADS = int(os.getenv("POWERLOGIT_THREADS", "1"))
LOG_LEVEL = os.getenv("POWERLOGIT_LOG_LEVEL", "INFO")

# Polya proposals: number of exponential terms kept in the series
POLYA_TRUNCATION = int(os.getenv("POWERLOGIT_POLYA_K", "100"))
SLICE_MAX_REJECTIONS = int(os.getenv("POWERLOGIT_SLICE_MAX_REJECTIONS", "1000000"))

# rows per latent RNG stream; keeps draws independent of the thread count
LATENT_BLOCK_SIZE = int(os.getenv("POWERLOGIT_BLOCK_SIZE", "256"))

STAGE_BURN_IN = int(os.getenv("POWERLOGIT_STAGE_BURN", "100"))
STAGE_KEEP = int(os.getenv("POWERLOGIT_STAGE_KEEP", "400"))

PRIOR_R = float(os.getenv("POWERLOGIT_PRIOR_R", "2.0"))
PRIOR_D = float(os.getenv("POWERLOGIT_PRIOR_D", "0.1"))
