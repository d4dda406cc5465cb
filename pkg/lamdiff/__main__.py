import sys

from lamdiff.cli import main

# emitted derivative programs nest deeply
sys.setrecursionlimit(10000)

if __name__ == "__main__":
    main()
