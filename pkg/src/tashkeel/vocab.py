"""Closed string vocabularies with reserved special ids."""

from __future__ import annotations

PAD = "<pad>"
UNK = "<unk>"
MASK = "<mask>"


class Vocab:
    """Maps strings to dense ids; specials occupy the lowest ids in order."""

    def __init__(self, items=(), specials=(PAD, UNK)):
        self.specials = tuple(specials)
        self.itos: list[str] = list(self.specials)
        self.stoi: dict[str, int] = {s: i for i, s in enumerate(self.itos)}
        for item in items:
            self.add(item)

    @classmethod
    def build(cls, items, specials=(PAD, UNK)) -> "Vocab":
        """Vocabulary over the distinct ``items`` in sorted order (stable across runs)."""
        return cls(sorted(set(items) - set(specials)), specials)

    def add(self, item: str) -> int:
        if item not in self.stoi:
            self.stoi[item] = len(self.itos)
            self.itos.append(item)
        return self.stoi[item]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, item):
        return item in self.stoi

    def id(self, item: str) -> int:
        try:
            return self.stoi[item]
        except KeyError:
            return self.stoi[UNK]

    def token(self, idx: int) -> str:
        return self.itos[idx]

    def to_json(self) -> dict:
        return {"specials": list(self.specials), "items": self.itos[len(self.specials):]}

    @classmethod
    def from_json(cls, data: dict) -> "Vocab":
        return cls(data["items"], tuple(data["specials"]))

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.itos == other.itos and self.specials == other.specials
