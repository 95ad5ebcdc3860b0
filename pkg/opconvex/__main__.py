import sys

from opconvex.cli import main

# python -m opconvex ...
if __name__ == '__main__':
    sys.exit(main('-m opconvex'))
