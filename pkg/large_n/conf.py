from pathlib import Path

from django.conf import settings

from large_n.arith import PrecisionContext

DEFAULT_TABLE_DATA = Path(__file__).resolve().parent / "data" / "reference_tables.json"


def default_digits() -> int:
    return getattr(settings, 'LARGE_N_DEFAULT_DIGITS', 100)


def guard_digits() -> int:
    return getattr(settings, 'LARGE_N_GUARD_DIGITS', 10)


def default_order() -> int:
    return getattr(settings, 'LARGE_N_DEFAULT_ORDER', 29)


def divergence_window() -> int:
    return getattr(settings, 'LARGE_N_DIVERGENCE_WINDOW', 3)


def solver_options() -> dict:
    return dict(getattr(settings, 'LARGE_N_SOLVER', {}))


def oracle_options() -> dict:
    return dict(getattr(settings, 'LARGE_N_ORACLE', {}))


def workers() -> int:
    return getattr(settings, 'LARGE_N_WORKERS', 1)


def table_data_path() -> Path:
    return Path(getattr(settings, 'LARGE_N_TABLE_DATA', DEFAULT_TABLE_DATA))


def check_modules() -> list[str]:
    return list(getattr(settings, 'LARGE_N_CHECK_MODULES', ['large_n_checks']))


def precision_context(digits: int | None = None) -> PrecisionContext:
    return PrecisionContext(digits or default_digits(), guard_digits())
