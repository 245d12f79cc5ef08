import sys

from cascade_bench.cli import main

sys.exit(main())
