"""Exception hierarchy shared by all tashkeel modules."""


class TashkeelError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class UnknownSymbol(TashkeelError, ValueError):
    def __init__(self, position, symbol=""):
        self.position = position
        self.symbol = symbol
        super().__init__(f"unknown Buckwalter symbol {symbol!r} at position {position}")


class UnknownCodepoint(TashkeelError, ValueError):
    def __init__(self, position, char=""):
        self.position = position
        self.char = char
        super().__init__(f"unknown codepoint U+{ord(char):04X} at position {position}" if char
                         else f"unknown codepoint at position {position}")


class MarkError(TashkeelError, ValueError):
    """A diacritic sequence that cannot be decomposed."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class OrphanMark(MarkError):
    def __init__(self, position):
        super().__init__("diacritic with no preceding letter", position)


class DoubleVowel(MarkError):
    def __init__(self, position):
        super().__init__("second vowel mark on one letter", position)


class CorpusError(TashkeelError):
    pass


class EncodingError(CorpusError):
    def __init__(self, line):
        self.line = line
        super().__init__(f"line {line}: not valid UTF-8")


class MalformedToken(CorpusError):
    def __init__(self, line, col, reason=""):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: malformed token" + (f" ({reason})" if reason else ""))


class EmptyCorpus(CorpusError):
    pass


class ContainerError(TashkeelError):
    """Bad magic, unsupported version or wrong payload kind in a binary file."""


class ModelVersionMismatch(ContainerError):
    pass


class AnnotationMismatch(TashkeelError):
    pass


class ShapeMismatch(TashkeelError, ValueError):
    pass


class EmptyDataset(TashkeelError):
    pass


class AlignmentError(TashkeelError):
    def __init__(self, sentence, token, detail=""):
        self.sentence = sentence
        self.token = token
        msg = f"reference/hypothesis misaligned at sentence {sentence}, token {token}"
        super().__init__(msg + (f": {detail}" if detail else ""))
