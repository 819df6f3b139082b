import argparse

from .service import DEFAULT_TIMEOUT_MS, serve


def main() -> None:
    parser = argparse.ArgumentParser(prog="pointsto-sidecar")
    parser.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    args = parser.parse_args()
    serve(timeout_ms=args.timeout_ms)


if __name__ == "__main__":
    main()
