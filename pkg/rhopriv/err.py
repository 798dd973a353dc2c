"""
    rhopriv.err
    ~~~~~~~~~~~
"""
from ._const import EXIT


class Error(Exception):
    """Exception that is the base class of all other error exceptions"""

    description = 'rhopriv internal error'
    exit_code = EXIT.ERROR

    def __init__(self, msg=None):
        super().__init__(msg or self.description)


class ProgrammingError(Error):
    """Exception that caused by incorrect user programming logic"""
    description = 'User programming error'


class InvalidValueError(Error):
    """Exceptions of illegal value"""

    description = 'Invalid value'
    exit_code = EXIT.VALIDATION


class NonPositiveMass(InvalidValueError):
    description = 'every probability mass must be strictly positive'


class NotNormalized(InvalidValueError):
    description = 'probabilities do not sum to 1 within {tol}'

    def __init__(self, msg=None, **kwargs):
        super().__init__(msg or self.description.format(**kwargs))


class NotSurjective(InvalidValueError):
    description = 'mapping leaves a label without preimage'


class AlphabetTooSmall(InvalidValueError):
    description = 'alphabet must have at least 2 symbols'


class NotRowStochastic(InvalidValueError):
    description = 'matrix rows must be nonnegative and sum to 1'


class NotRowConstant(InvalidValueError):
    description = 'mechanism rows differ inside a cell f^-1(j)'


class NegativeEntry(InvalidValueError):
    description = 'constructed mechanism has a negative entry'


class NoPredicate(InvalidValueError):
    description = 'the data model has no predicate mapping h'


class IncompatibleFamily(InvalidValueError):
    description = 'prior family members must share (r, f, h)'


class LambdaOutOfRange(InvalidValueError):
    description = 'Renyi order must lie in the open interval (0, 1)'


class SameRowIndex(InvalidValueError):
    description = 'Chernoff information needs two distinct rows'


class RealmError(Error):
    """Exceptions of a recoverability level outside a scheme's realm"""

    description = 'rho outside the admissible realm'
    exit_code = EXIT.REALM


class RhoOutOfRealm(RealmError):
    description = 'rho={rho} outside the realm {realm}'

    def __init__(self, msg=None, **kwargs):
        super().__init__(msg or self.description.format(**kwargs))


class NumericalError(Error):
    description = 'numeric inconsistency'


class DegenerateDenominator(NumericalError):
    description = 'vanishing denominator while building a mechanism'


class SizeError(Error):
    """Exceptions of work that exceeds a configured cap"""

    description = 'problem size exceeds the configured cap'
    exit_code = EXIT.SIZE


class EnumerationTooLarge(SizeError):
    description = 'enumeration of {size} outcomes exceeds the cap {cap}'

    def __init__(self, msg=None, **kwargs):
        super().__init__(msg or self.description.format(**kwargs))


class SearchSpaceTooLarge(SizeError):
    description = 'grid search over {size} candidates exceeds the cap {cap}'

    def __init__(self, msg=None, **kwargs):
        super().__init__(msg or self.description.format(**kwargs))


class InvariantViolation(Error):
    """A verified property did not hold"""

    description = 'invariant violated'
    exit_code = EXIT.INVARIANT


class ProgrammingWarning(RuntimeWarning):
    """Some warnings about not being appreciated"""
