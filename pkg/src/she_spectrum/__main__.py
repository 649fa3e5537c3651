"""Allow execution via python -m she_spectrum."""

from she_spectrum.cli import main

if __name__ == "__main__":
    main()
