#!/usr/bin/env python3
import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import argparse
import logging
from datetime import datetime

from components.verification import run_verification
from config.settings import LOG_CONFIG, VERIFY_CONFIG
from utils.report_helpers import format_verification_text

# Set up logging
log_dir = Path(__file__).parent.parent / VERIFY_CONFIG["log_dir"]
log_dir.mkdir(exist_ok=True)

logging.basicConfig(
    level=logging.INFO,
    format=LOG_CONFIG["format"],
    handlers=[
        logging.FileHandler(log_dir / f'verify_{datetime.now().strftime("%Y%m%d")}.log'),
        logging.StreamHandler()
    ]
)

logger = logging.getLogger(__name__)


def main(argv=None):
    """Run the verification suite and log a summary"""
    parser = argparse.ArgumentParser(description="Run the heralded-entanglement verification suite.")
    parser.add_argument("--quick", action="store_true", help="reduced grids")
    parser.add_argument("--check", action="append", dest="checks", help="run only this check (repeatable)")
    args = parser.parse_args(argv)

    try:
        logger.info("Starting verification run")
        report = run_verification(quick=args.quick, checks=args.checks)
        logger.info("\n" + format_verification_text(report.results))

        if report.passed:
            logger.info(f"Verification completed successfully: {report.counts}")
            return 0
        logger.error(f"Verification failed: {report.counts}")
        return 1

    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
