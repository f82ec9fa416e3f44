"""
Byte-level text tokenizer.

Text token ids are opaque to the runtime; wherever plain text has to enter a
token stream (retrieved tool payloads, scripted answers) it is encoded as its
UTF-8 bytes, ids 0..255.
"""

from typing import Iterable, List


class ByteTokenizer:
    vocab_size = 256

    def encode(self, text: str) -> List[int]:
        return list(text.encode("utf-8"))

    def decode(self, ids: Iterable[int]) -> str:
        return bytes(i for i in ids if 0 <= i < self.vocab_size).decode(
            "utf-8", errors="replace"
        )
