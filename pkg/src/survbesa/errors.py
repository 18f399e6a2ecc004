"""Exception hierarchy shared by all survbesa modules."""


class SurvBesaError(Exception):
    """Base class for all errors raised by this package."""


# dataset construction / ingestion

class EmptyDataset(SurvBesaError):
    """No records were supplied."""


class DimensionMismatch(SurvBesaError):
    """Feature vectors disagree on dimension, or a query has the wrong one."""


class InvalidValue(SurvBesaError):
    """A field holds an out-of-domain value; message names field and index."""


class ParseError(SurvBesaError):
    """A CSV cell could not be parsed; message names row and column."""


class MissingColumn(SurvBesaError):
    """A required CSV column is absent."""


class DegenerateSplit(SurvBesaError):
    """A random split left a part empty or without uncensored records."""


# step survival functions

class EmptyGrid(SurvBesaError):
    """A survival function needs at least one grid point."""


class GridNotSuperset(SurvBesaError):
    """Rebase target grid does not contain every source grid point."""


class GridMismatch(SurvBesaError):
    """Survival functions expected on a common grid disagree."""


# estimators and ensembles

class NoUncensoredEvents(SurvBesaError):
    """A Beran estimator cannot be fitted on fully censored data."""


class InvalidTau(SurvBesaError):
    """Kernel temperature must be positive."""


class InvalidFraction(SurvBesaError):
    """Subset fraction outside (0, 1] or subsets would be smaller than 2."""


class DegenerateSubsets(SurvBesaError):
    """Could not draw a subset with enough uncensored records."""


# attention and training

class SingleLearner(SurvBesaError):
    """Self-attention needs at least two learners."""


class ModelMismatch(SurvBesaError):
    """Contexts or problems built from different ensembles were combined."""


class EmptyPairSet(SurvBesaError):
    """No comparable pairs to train or evaluate on."""


class InvalidEpsilon(SurvBesaError):
    """Contamination weight must lie in [0, 1]."""


class InvalidPhi(SurvBesaError):
    """Contamination softmax temperature must be positive."""


class NonFiniteObjective(SurvBesaError):
    """An optimization objective evaluated to NaN or infinity."""


# metrics

class NoComparablePairs(SurvBesaError):
    """The concordance index is undefined without comparable pairs."""


class DegenerateVariance(SurvBesaError):
    """Paired differences have zero sample variance."""


# synthetic generator

class NonPositiveScale(SurvBesaError):
    """The sinusoidal mean would make the event-time scale non-positive."""
