class QCError(Exception):
    """Base class for failures surfaced to callers and the CLI."""


class InadmissiblePacket(QCError):
    pass


class JacobiError(QCError):
    pass


class AdmissibilityError(QCError):
    pass


class NoBiquardConnection(QCError):
    pass


class IntegrabilityError(QCError):
    """The operation needs an integrable vertical distribution."""


class ModelMismatch(QCError):
    pass
