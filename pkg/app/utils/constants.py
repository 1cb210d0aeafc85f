import re

from config import STAGE_BURN_IN, STAGE_KEEP

# one annealing stage, e.g. "5:500" or "2.5:300"
SCHEDULE_STAGE_PATTERN = re.compile(r'^\s*(\d+(?:\.\d+)?)\s*:\s*(\d+)\s*$')
FIXED_NU_PATTERN = re.compile(r'^fixed:(\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)$')

BETA_FLOOR = 1e-8
PROBABILITY_CLAMP = 1e-12

JITTER_START = 1e-10
JITTER_STOP = 1e-6

SMW_RATIO = 2
DEFAULT_SCHEDULE = tuple((kappa, STAGE_BURN_IN + STAGE_KEEP) for kappa in (1.0, 5.0, 10.0, 20.0))
