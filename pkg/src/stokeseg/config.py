import os

from stokeseg.constants import Constants

THREADS = int(os.getenv('STOKESEG_THREADS', str(os.cpu_count() or 1)))
OUTPUT_DIR = os.getenv('STOKESEG_OUT_DIR', "results")

CONDITION_NUMBER_BUDGET = int(os.getenv('STOKESEG_COND_BUDGET', str(Constants.CONDITION_NUMBER_BUDGET)))
INFSUP_VELOCITY_BUDGET = int(os.getenv('STOKESEG_INFSUP_BUDGET', str(Constants.INFSUP_VELOCITY_BUDGET)))
