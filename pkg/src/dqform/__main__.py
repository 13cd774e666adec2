import sys

from dqform.cli import main

sys.exit(main())
