"""Entry point delegating to tensorpca.cli.main."""
import sys

from tensorpca.cli import main

if __name__ == "__main__":
    sys.exit(main())
