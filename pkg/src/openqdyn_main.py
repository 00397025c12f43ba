"""Console-script launcher.

Lives outside the package so the OQS_NUM_THREADS cap can be applied to the
linear-algebra thread pools before numpy is ever imported.
"""
import os
import sys


def main():
    cap = os.environ.get("OQS_NUM_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)
    from openqdyn.cli import main as cli_main

    sys.exit(cli_main())


if __name__ == "__main__":
    main()
