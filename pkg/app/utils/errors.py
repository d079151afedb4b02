"""
Error Types

Every error raised by the simulator carries a short error code so the CLI and
the HTTP layer can report it the same way.
"""


class BackscatterError(Exception):
    """Base class for all simulator errors"""

    error_code = 'SYS_001'
    status_code = 400

    def __init__(self, message="Simulation error", error_code=None):
        self.message = message
        if error_code:
            self.error_code = error_code
        super().__init__(self.message)

    def to_dict(self):
        return {
            'success': False,
            'message': self.message,
            'error_code': self.error_code
        }


class ConfigurationError(BackscatterError):
    """Raised when a network or solver configuration violates its invariants"""
    error_code = 'CFG_001'


class SpecParseError(BackscatterError):
    """Raised when an experiment file cannot be parsed or validated"""
    error_code = 'SPEC_001'

    def __init__(self, message, line=None, column=None, field=None):
        self.line = line
        self.column = column
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
            if column is not None:
                location.append(f"column {column}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class FeasibilityError(BackscatterError):
    """Raised when a training group holds more tags than there are subchannels"""
    error_code = 'TOPO_001'

    def __init__(self, core, group, size, n_channels):
        self.core = core
        self.group = group
        self.size = size
        self.n_channels = n_channels
        super().__init__(
            f"Training group (b={core}, m={group}) holds {size} tags "
            f"but only {n_channels} subchannels exist"
        )


class UnsupportedSizeError(BackscatterError):
    """Raised for training-set sizes the Sylvester construction cannot build"""
    error_code = 'TOPO_002'


class DomainError(BackscatterError):
    """Raised when a numerical routine is called outside its domain"""
    error_code = 'NUM_001'


class DegenerateChannelError(BackscatterError):
    """Raised when a detector is built from an all-zero compound channel"""
    error_code = 'DET_001'


class IncompleteTableError(BackscatterError):
    """Raised when an SINR table lacks entries for a cell"""
    error_code = 'ALLOC_001'


class ConstraintViolationError(BackscatterError):
    """Raised when an assignment violates a constraint of the allocation problem"""
    error_code = 'ALLOC_002'

    def __init__(self, constraint, detail):
        self.constraint = constraint
        super().__init__(f"Constraint {constraint} violated: {detail}")
