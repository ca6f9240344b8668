"""
``python -m large_n <command> [options]`` and the ``large-n`` console script,
usable outside a Django project.
"""
import sys

from django.conf import settings
from django.core.management import CommandError, execute_from_command_line


def main(argv=None):
    if not settings.configured:
        settings.configure(INSTALLED_APPS=["large_n", "rest_framework"])
    argv = list(argv if argv is not None else sys.argv)
    argv[0] = "large-n"
    try:
        execute_from_command_line(argv)
    except CommandError as e:
        sys.stderr.write(f"CommandError: {e}\n")
        sys.exit(e.returncode)


if __name__ == "__main__":
    main()
