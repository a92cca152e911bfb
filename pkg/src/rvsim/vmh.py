"""Verilog memory hex (.vmh) images.

The format follows the $readmemh() conventions for a 32-bit wide memory:
whitespace-separated 1-8 digit hex word tokens, `@HEXADDR` records that set
the next word address, and `//` comments running to end of line.
"""

from __future__ import annotations

MASK32 = 0xFFFFFFFF


class VmhError(Exception):
    pass


class MalformedToken(VmhError):
    def __init__(self, token, lineno):
        super().__init__(f"malformed token {token!r} on line {lineno}")
        self.token = token
        self.lineno = lineno


class AddressOverflow(VmhError):
    pass


class MemoryImage:
    """Sparse word-addressed image plus an entry point (byte address)."""

    def __init__(self, words=None, entry=0):
        self.words = dict(words or {})
        self.entry = entry

    def __eq__(self, other):
        return (isinstance(other, MemoryImage)
                and self.words == other.words and self.entry == other.entry)

    def __len__(self):
        return len(self.words)

    def items(self):
        return self.words.items()

    def max_word_addr(self):
        return max(self.words) if self.words else -1

    def copy(self):
        return MemoryImage(self.words, self.entry)


def emit_vmh(image: MemoryImage) -> str:
    """Render an image as .vmh text; sparse gaps become @address records."""
    out = []
    next_addr = None
    for addr in sorted(image.words):
        if addr != next_addr:
            out.append(f"@{addr:x}")
        out.append(f"{image.words[addr] & MASK32:08x}")
        next_addr = addr + 1
    return "\n".join(out) + ("\n" if out else "")


def parse_vmh(text: str) -> MemoryImage:
    """Parse .vmh text; inverse of emit_vmh."""
    words = {}
    addr = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("//", 1)[0]
        for token in line.split():
            if token.startswith("@"):
                body = token[1:]
                if not body or any(c not in "0123456789abcdefABCDEF" for c in body):
                    raise MalformedToken(token, lineno)
                addr = int(body, 16)
                continue
            if len(token) > 8 or any(c not in "0123456789abcdefABCDEF" for c in token):
                raise MalformedToken(token, lineno)
            if addr > 0x3FFFFFFF:
                raise AddressOverflow(f"word address 0x{addr:x} on line {lineno}")
            words[addr] = int(token, 16)
            addr += 1
    return MemoryImage(words)


def read_vmh(path) -> MemoryImage:
    with open(path) as f:
        return parse_vmh(f.read())


def write_vmh(image: MemoryImage, path):
    with open(path, "w") as f:
        f.write(emit_vmh(image))
