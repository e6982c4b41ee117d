import sys
import logging

from cli import main

if __name__ == '__main__':
    logging.basicConfig(format='%(asctime)s - %(levelname)s - %(message)s')
    # Reduce logging noise globally; -v / -vv raise the level
    logging.getLogger().setLevel(logging.WARNING)
    sys.exit(main(sys.argv[1:]))
