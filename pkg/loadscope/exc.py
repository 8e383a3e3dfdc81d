class LoadscopeWarning(UserWarning):
    """Base warning for loadscope"""
    pass


class LoadscopeError(Exception):
    """Base error for loadscope"""
    pass


class ConfigurationError(LoadscopeError):
    """Error in the run configuration"""
    pass


class DataError(LoadscopeError):
    """Base error for input data that cannot be used"""
    pass


class ModelError(LoadscopeError):
    """Base error for model fitting and model files"""
    pass


class AnalysisError(LoadscopeError):
    """Base error for statistical analyses"""
    pass


# core data

class ConstantColumn(DataError):
    """A column has zero variance and cannot be standardized"""

    def __init__(self, name):
        self.name = name
        super().__init__(f'Column {name!r} is constant')

    def __reduce__(self):
        return type(self), (self.name,)


class NonFinite(DataError):
    """A column contains a NaN or infinite value"""

    def __init__(self, name, row):
        self.name = name
        self.row = row
        super().__init__(f'Column {name!r} has a non-finite value at row {row}')

    def __reduce__(self):
        return type(self), (self.name, self.row)


class ColumnMismatch(DataError):
    """Columns do not match the ones seen at fit time"""
    pass


class EmptyPartition(DataError):
    """A split partition received no rows"""

    def __init__(self, which):
        self.which = which
        super().__init__(f'Partition {which!r} is empty')

    def __reduce__(self):
        return type(self), (self.which,)


class Misaligned(DataError):
    """Paired inputs do not share shape or index"""
    pass


class Leakage(DataError):
    """A feature row uses data dated after its issue day"""

    def __init__(self, day, source, date):
        self.day = day
        self.source = source
        self.date = date
        super().__init__(
            f'Row for issue day {day} uses {source} data dated {date}')

    def __reduce__(self):
        return type(self), (self.day, self.source, self.date)


# ingestion

class SchemaError(DataError):
    """An input file does not conform to its schema"""

    def __init__(self, file, line, reason=''):
        self.file = file
        self.line = line
        self.reason = reason
        msg = f'Schema error in {file} at line {line}'
        if reason:
            msg += f': {reason}'
        super().__init__(msg)

    def __reduce__(self):
        return type(self), (self.file, self.line, self.reason)


class GapTooLarge(DataError):
    """A run of missing hours is longer than the interpolation threshold"""

    def __init__(self, series, start, length):
        self.series = series
        self.start = start
        self.length = length
        super().__init__(
            f'Gap of {length} hours in {series!r} starting at {start}')

    def __reduce__(self):
        return type(self), (self.series, self.start, self.length)


class UnmappedRegion(DataError):
    """A demand region has no temperature city"""

    def __init__(self, region):
        self.region = region
        super().__init__(f'Region {region!r} is not mapped to a city')

    def __reduce__(self):
        return type(self), (self.region,)


class InvalidSpec(DataError):
    """Synthetic panel parameters are invalid"""
    pass


# features

class InsufficientHistory(DataError):
    """The panel lacks the data needed to build features for an issue day"""

    def __init__(self, day):
        self.day = day
        super().__init__(f'Insufficient history for issue day {day}')

    def __reduce__(self):
        return type(self), (self.day,)


class MissingCentroids(DataError):
    """Social features were requested but no centroid series were given"""
    pass


class NoObservations(DataError):
    """No training observations exist for a (month, hour) cell"""

    def __init__(self, month, hour):
        self.month = month
        self.hour = hour
        super().__init__(f'No observations for month {month}, hour {hour}')

    def __reduce__(self):
        return type(self), (self.month, self.hour)


class TooFewFeatures(AnalysisError):
    """Clustering needs at least three feature columns"""
    pass


class TooFewMerges(AnalysisError):
    """Elbow selection needs at least four merges"""
    pass


class BadK(AnalysisError):
    """Requested cluster count is not available"""
    pass


# gbdt

class DegenerateData(ModelError):
    """Training data cannot support a tree"""
    pass


class EmptyData(ModelError):
    """Training data is empty"""
    pass


class EmptySpace(ModelError):
    """Hyperparameter search space or budget is empty"""
    pass


class UnknownFormatVersion(ModelError):
    """Model file has an unsupported format version"""
    pass


class ModelNotFound(ModelError):
    """Trained model artifacts are missing"""
    pass


# baselines

class MissingDay(DataError):
    """The issue day is not fully observed"""

    def __init__(self, day):
        self.day = day
        super().__init__(f'Day {day} is not fully observed')

    def __reduce__(self):
        return type(self), (self.day,)


class NoHistory(DataError):
    """The training range holds no demand for the target month"""

    def __init__(self, month):
        self.month = month
        super().__init__(f'No training history for month {month}')

    def __reduce__(self):
        return type(self), (self.month,)


class NotConverged(ModelError):
    """Coordinate descent did not converge"""

    def __init__(self, max_iter):
        self.max_iter = max_iter
        super().__init__(f'Did not converge within {max_iter} sweeps')

    def __reduce__(self):
        return type(self), (self.max_iter,)


# evaluation, diagnostics

class ZeroTruth(DataError):
    """Truth is zero where a percentage error is required"""

    def __init__(self, day, hour):
        self.day = day
        self.hour = hour
        super().__init__(f'Zero truth at day {day}, hour {hour}')

    def __reduce__(self):
        return type(self), (self.day, self.hour)


class NonPositiveSigma(AnalysisError):
    """Predictive standard deviation must be positive"""
    pass


class KeyMismatch(AnalysisError):
    """Score tables do not share keys"""
    pass


class TooFewModels(AnalysisError):
    """Ranking needs at least two models"""
    pass


class TooFewTasks(AnalysisError):
    """Ranking needs at least two tasks"""
    pass


class TooFew(AnalysisError):
    """Too few observations"""
    pass


class LengthMismatch(AnalysisError):
    """Paired samples have different lengths"""
    pass


# causality

class TooShort(AnalysisError):
    """Overlapping span is too short for the requested lag order"""
    pass


class ConstantSeries(AnalysisError):
    """A series has zero variance"""
    pass


class DegenerateTreatment(AnalysisError):
    """Treatment is (almost) fully determined by covariates"""
    pass


# attribution

class MissingCovers(ModelError):
    """Tree nodes lack cover counts"""
    pass


class BadFeature(AnalysisError):
    """Feature is unknown or the pair is invalid"""
    pass


# cli

class DateOutOfRange(DataError):
    """Issue date is outside the range supported by the trained models"""
    pass


class TaskFailed(LoadscopeError):
    """A unit of work of a run failed unexpectedly"""

    def __init__(self, task, reason=''):
        self.task = task
        self.reason = reason
        msg = f'Task {task} failed'
        if reason:
            msg += f': {reason}'
        super().__init__(msg)

    def __reduce__(self):
        return type(self), (self.task, self.reason)
