"""python -m npsg entry point."""

from npsg.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
