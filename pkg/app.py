import sys

from dotenv import load_dotenv

# Load environment variables (EULCOUNT_COLOR)
load_dotenv()

from components.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
