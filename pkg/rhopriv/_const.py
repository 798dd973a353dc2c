from . import util

TOL = util.adict(
    INPUT=1e-12,
    ROW=1e-12,
    CHECK=1e-10,
)
CAP = util.adict(
    ENUMERATION=20_000_000,
    SEARCH=2_000_000,
)
EXIT = util.adict(
    OK=0,
    ERROR=1,
    VALIDATION=2,
    REALM=3,
    SIZE=4,
    INVARIANT=5,
)
SCHEME = util.adict(
    WO='wo',
    VO='vo',
    WO_PRED='wo-pred',
    WO_DBLPRIME='wo-dblprime',
    V1='v1',
    V2='v2',
)
SCHEMES = tuple(SCHEME.values())
METHOD = util.adict(
    NAIVE='naive-enumeration',
    TYPE_CLASS='type-class',
    REDUCED='reduced-lemma3',
)
REALM = util.adict(
    CONVERGING='converging',
    NON_CONVERGING='non-converging',
)
VERDICT = util.adict(
    STRICT='strict',
    EQUALITY='equality',
    WEAK='weak',
)
RNG_ALGORITHM = 'numpy.random.PCG64'
LAMBDA_EDGE = 1e-9
