import sys

from src.Simulations.certify import main

if __name__ == "__main__":
    sys.exit(main())
