"""Shared exception types."""


class CyberRagError(Exception):
    """Base class for all cyberrag errors."""


class ConfigError(CyberRagError):
    pass


class InvalidClass(CyberRagError):
    pass


class EmptyTable(CyberRagError):
    pass


class InvalidParams(CyberRagError):
    pass


class DimensionMismatch(CyberRagError):
    pass


class EmbedderUnavailable(CyberRagError):
    pass


class EndpointUnavailable(CyberRagError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


class MalformedResponse(CyberRagError):
    pass


class RuleFileInvalid(CyberRagError):
    pass


class TemplateMissing(CyberRagError):
    pass


class StoreUninitialized(CyberRagError):
    pass


class UnknownAlert(CyberRagError):
    pass


class SessionClosed(CyberRagError):
    pass


class EmptyReferences(CyberRagError):
    pass


class EmptyResults(CyberRagError):
    pass


class MalformedJudgeReply(CyberRagError):
    pass


class ServiceUnready(CyberRagError):
    pass
