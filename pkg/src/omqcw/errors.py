"""Error types shared across the engine. Each carries a CLI exit code."""


class EngineError(Exception):
    exit_code = 1
    code = "error"


class ParseError(EngineError):
    exit_code = 2
    code = "parse"

    def __init__(self, msg, line=None, col=None, source=None):
        self.line, self.col, self.source = line, col, source
        where = ""
        if line is not None:
            where = "line %d" % line + (", col %d" % col if col is not None else "")
            if source:
                where = "%s: %s" % (source, where)
            where += ": "
        super().__init__(where + msg)


class DialectError(ParseError):
    code = "dialect"


class ValidationError(EngineError):
    exit_code = 3
    code = "validation"


class BudgetError(EngineError):
    exit_code = 4
    code = "budget"
