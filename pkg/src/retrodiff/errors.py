from __future__ import annotations


class RetrodiffError(Exception):
    """Base class for every error raised by the package."""

    user_error: bool = False


class ContractError(RetrodiffError):
    pass


class DimensionError(ContractError):
    def __init__(self, op: str, *shapes: tuple[int, ...]) -> None:
        self.op = op
        self.shapes = shapes
        rendered = " vs ".join(str(tuple(shape)) for shape in shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}")


class NumericError(RetrodiffError):
    pass


class LexError(RetrodiffError):
    user_error = True

    def __init__(self, message: str, offset: int) -> None:
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class ParseError(RetrodiffError):
    user_error = True

    def __init__(self, message: str, token_index: int) -> None:
        self.token_index = token_index
        super().__init__(f"{message} at token {token_index}")


class AlignmentError(RetrodiffError):
    user_error = True


class DatasetError(RetrodiffError):
    user_error = True


class ConfigError(RetrodiffError):
    user_error = True


class CheckpointError(RetrodiffError):
    user_error = True


class CheckpointVersionError(CheckpointError):
    pass


class InputError(RetrodiffError):
    user_error = True


class UsageError(InputError):
    pass
