"""Exception types shared across the package."""


class PalError(Exception):
    pass


class PriorityTieError(PalError):
    """Two distinct items received the same priority key."""


class InvalidInstanceError(PalError):
    pass


class SearchBudgetError(PalError):
    """An exhaustive search was asked to go past its configured cap."""


class DomainError(PalError, ValueError):
    pass


class WhiteBoxRequiredError(PalError):
    pass


class GadgetConditionError(PalError):
    def __init__(self, condition, detail=""):
        self.condition = condition
        self.detail = detail
        msg = condition if not detail else f"{condition}: {detail}"
        super().__init__(msg)


class CatalogError(PalError):
    pass


class InstantiationError(PalError):
    pass


class UsageError(PalError):
    pass


class OrderingViolation(AssertionError):
    """Raised when a harness would hand items to an algorithm out of priority order."""
