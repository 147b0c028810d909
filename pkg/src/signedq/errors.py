"""Exception hierarchy shared by every module of the package."""


class SignedQError(Exception):
    """Base class for all errors raised by signedq."""


# hypergraph
class TooManyNegativeEdges(SignedQError):
    pass


class InvalidWitness(SignedQError):
    pass


class UnsafeHypergraph(SignedQError):
    pass


# algebra
class UnknownSemiring(SignedQError):
    pass


class SemiringOverflow(SignedQError, OverflowError):
    pass


# storage
class ParseError(SignedQError):
    pass


class DuplicateFactorKey(SignedQError):
    pass


class SchemaMismatch(SignedQError):
    pass


# frontend
class QueryError(SignedQError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnsafeQuery(QueryError):
    pass


class DuplicateAtom(QueryError):
    pass


class UnknownVariableInHead(QueryError):
    pass


# engines
class InvalidSequence(SignedQError):
    pass


class FreeConnexViolation(SignedQError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class MissingDefault(SignedQError):
    pass


class UnboundVariable(SignedQError):
    pass


class OracleMissing(SignedQError):
    pass


# rangesum
class UnknownKey(SignedQError, KeyError):
    pass


class MisalignedRange(SignedQError):
    pass


# oracle / diff / cli
class TooLarge(SignedQError):
    pass


class NotSignedAcyclic(SignedQError):
    pass


class StructureViolation(SignedQError):
    pass


class GeneratorError(SignedQError):
    pass
