"""Exception hierarchy shared by the library and the CLI."""


class TropgtError(Exception):
    """Base class for all tropgt errors."""


class InputError(TropgtError):
    """A caller-supplied value violates a precondition (CLI exit code 2)."""


class InconsistentInputError(InputError):
    """Design/outcome pair cannot have been produced by the min-outcome model."""


class BudgetError(TropgtError):
    """An exhaustive enumeration would exceed its candidate budget (CLI exit code 3)."""
