"""Exception hierarchy shared by every module.

Each class carries a short ``code`` that the command-line front end prints
as its machine-parsable error line.
"""


class GLFSError(Exception):
    code = "error"


class InvalidParameterError(GLFSError, ValueError):
    code = "invalid-parameter"


class InvalidInputError(GLFSError, ValueError):
    code = "invalid-input"


class NumericalError(GLFSError, ArithmeticError):
    """A factorization failed or a non-finite value appeared.

    ``last_beta`` holds the last valid optimizer iterate when one exists.
    """

    code = "numerical-error"

    def __init__(self, message, last_beta=None):
        super().__init__(message)
        self.last_beta = last_beta


class EmptySelectionError(GLFSError):
    code = "empty-selection"


class ParseError(GLFSError, ValueError):
    code = "parse-error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
