import logging
import sys

from app.cli import main
from config import LOG_LEVEL

if __name__ == "__main__":
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(message)s")
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logging.warning("Interrupted")
        sys.exit(130)
