import os
import sys


def main() -> None:
    threads = os.environ.get("CHEB2D_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    from .cli import run

    sys.exit(run())


if __name__ == "__main__":
    main()
