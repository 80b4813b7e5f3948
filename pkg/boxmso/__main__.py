"""Allow ``python -m boxmso``."""

from boxmso.main import main

main()
