import json
import logging

from django.core.management.base import BaseCommand, CommandError

from large_n.errors import LargeNError

logger = logging.getLogger(__name__)


class LargeNCommand(BaseCommand):
    """
    Maps :class:`LargeNError` to exit codes: usage errors exit 1, every other
    error writes its JSON error record to stdout and exits 2.
    """
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Bad flags raise CommandError (exit 1) instead of argparse's exit 2
        parser.called_from_command_line = False
        return parser

    def execute(self, *args, **options):
        if options.get("verbosity", 1) >= 2:
            package_logger = logging.getLogger("large_n")
            package_logger.setLevel(logging.DEBUG)
            if not package_logger.handlers:
                package_logger.addHandler(logging.StreamHandler(self.stderr._out))
        try:
            return super().execute(*args, **options)
        except LargeNError as e:
            if e.exit_code == 1:
                raise CommandError(f"{e.code}: {e}", returncode=1) from e
            self.stdout.write(json.dumps(e.as_record()))
            raise CommandError(f"{e.code}: {e}", returncode=e.exit_code) from e

    def write_output(self, content: bytes | str, output: str | None = None):
        if isinstance(content, bytes):
            content = content.decode("utf-8")
        if output:
            with open(output, "w", encoding="utf-8") as f:
                f.write(content)
        else:
            self.stdout.write(content, ending="")
