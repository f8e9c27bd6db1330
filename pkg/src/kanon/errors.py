"""Exception hierarchy shared by every kanon module."""


class KanonError(Exception):
    """Base class for all errors raised by kanon."""


class DomainError(KanonError, ValueError):
    """An arithmetic argument is outside the operation's domain."""


class NotInvertible(DomainError):
    pass


class InvalidCiphertext(KanonError, ValueError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


class MessageTooLarge(KanonError, ValueError):
    pass


class ChunkTooLarge(MessageTooLarge):
    pass


class ProtocolError(KanonError):
    """Shape or ordering violation in the private search protocol."""


class IndexOutOfRange(ProtocolError, IndexError):
    pass


class TermNotFound(KanonError, KeyError):
    pass


class IndexStoreError(KanonError):
    """Base for index-store errors."""


class ParseError(IndexStoreError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateTerm(ParseError):
    pass


class PostingLengthMismatch(ParseError):
    pass


class BlockOutOfRange(IndexStoreError, IndexError):
    pass


class TransportError(KanonError):
    """The byte stream ended early or carried something unparseable."""


class RemoteError(TransportError):
    """The peer answered with an ERROR frame."""

    def __init__(self, code, message):
        super().__init__(f"remote error 0x{code:04x}: {message}")
        self.code = code
        self.message = message
