import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigurationError, SimulationError
from simulations.config import SCENARIOS, parse_config
from simulations.runner import run

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Runs one four-wave mixing scenario and writes its tables and manifest'

    def add_arguments(self, parser):
        parser.add_argument('scenario', nargs='?', choices=SCENARIOS, help='Scenario to run; overrides the config file')
        parser.add_argument('--config', help='Run configuration file (key = value per line)')
        parser.add_argument('--out', help='Output directory')
        parser.add_argument('--workers', type=int, help='Worker processes for coherent ensembles')
        parser.add_argument('--long-running', action='store_true', help='Allow coherent means above the long-running limit')

    def handle(self, *args, **options):
        text = ""
        if options.get('config'):
            try:
                text = Path(options['config']).read_text(encoding='utf-8')
            except OSError as exc:
                raise CommandError(f"cannot read config {options['config']}: {exc}", returncode=1)

        overrides = {
            'scenario': options.get('scenario'),
            'output': options.get('out'),
            'workers': options.get('workers'),
            'long_running': options.get('long_running'),
        }
        try:
            config = parse_config(text, overrides)
            paths = run(config)
        except ConfigurationError as exc:
            for line, message in exc.issues:
                where = f"line {line}: " if line else ""
                self.stderr.write(self.style.ERROR(f"{where}{message}"))
            raise CommandError(f"invalid configuration: {exc.message}", returncode=exc.exit_status)
        except SimulationError as exc:
            raise CommandError(str(exc), returncode=exc.exit_status)

        for path in paths:
            self.stdout.write(f"  {path}")
        self.stdout.write(self.style.SUCCESS(f"{config.scenario} finished: {len(paths)} file(s) in {config.output}"))
