import sys

from pumpsim.main import main

sys.exit(main())
