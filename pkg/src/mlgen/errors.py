"""Exception hierarchy shared by every stage of the generator."""


class MlgenError(Exception):
    """Base class for all generator errors."""


class ModelError(MlgenError):
    """The model file is malformed or violates a structural invariant."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class UnresolvedReferenceError(ModelError):
    def __init__(self, name, location=None):
        self.name = name
        super().__init__(f"unresolved reference {name!r}", location)


class InheritanceCycleError(ModelError):
    def __init__(self, cycle, location=None):
        self.cycle = list(cycle)
        super().__init__("cycle: " + " -> ".join(self.cycle), location)


class MappingError(MlgenError):
    """The mapping configuration is malformed or cannot select an entry."""


class CommandSyntaxError(MlgenError):
    def __init__(self, message, offset, text=None):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at offset {offset})")


class CommandEvalError(MlgenError):
    """A well-formed model command could not be evaluated."""


class TemplateError(MlgenError):
    """A template file is missing or malformed."""


class MissingVariableError(TemplateError):
    def __init__(self, variable, template=None, block=None):
        self.variable = variable
        self.template = template
        self.block = block
        super().__init__(
            f"template {template!r} for block {block!r}: "
            f"no value bound to mandatory variable {variable!r}"
        )


class GenerationError(MlgenError):
    """A block failed during generation; ``block`` names the offender."""

    def __init__(self, message, block=None):
        self.block = block
        if block is not None:
            message = f"{block}: {message}"
        super().__init__(message)
