import sys

from chmogp.experiments.cli import main

sys.exit(main())
