"""Exception hierarchy shared by every module of the toolkit."""


class CegarError(Exception):
    """Base class for all toolkit errors."""


class ModelError(CegarError, ValueError):
    """A model or partition document is malformed or violates an invariant.

    ``where`` locates the problem (a JSON path such as ``transitions[3]`` or a
    ``line:column`` pair) when it is known.
    """

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class RowSumError(ModelError):
    pass


class DanglingReference(ModelError):
    pass


class InconsistentPartition(ModelError):
    pass


class FormulaSyntaxError(CegarError, ValueError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnsupportedFragment(CegarError):
    """The formula is outside what the checker can decide."""


class BudgetExceeded(CegarError):
    """The exact value iteration grew past its configured memo budget."""


class MissingAdversaryEntry(CegarError, KeyError):
    pass


class ActionSetMismatch(CegarError):
    pass


class Exhausted(CegarError):
    """Counterexample enumeration ran out of paths below the threshold."""


class NotSpurious(CegarError):
    pass


class NoSplittableBlock(CegarError):
    pass


class IndexOutOfRange(CegarError, IndexError):
    pass


class SimulationViolation(CegarError):
    """An abstraction failed to safely simulate the concrete system."""
