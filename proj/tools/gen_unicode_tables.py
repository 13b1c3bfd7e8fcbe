#!/usr/bin/env python3
"""Regenerates src/unicode_tables.cpp.

Emits codepoint range tables for the three character classes the BPE
pre-tokenizer pattern needs: \\p{L}, \\p{N} and \\s. Ground truth is the
`regex` module (the same engine the reference tokenizer uses); falls back
to unicodedata if `regex` is unavailable.
"""

import sys

try:
    import regex

    def is_letter(ch):
        return regex.match(r"\p{L}", ch) is not None

    def is_number(ch):
        return regex.match(r"\p{N}", ch) is not None

    def is_space(ch):
        return regex.match(r"\s", ch) is not None

except ImportError:
    import unicodedata

    def is_letter(ch):
        return unicodedata.category(ch).startswith("L")

    def is_number(ch):
        return unicodedata.category(ch) in ("Nd", "Nl", "No")

    def is_space(ch):
        return ch.isspace()


def ranges_for(pred):
    out = []
    start = None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            ok = False
        else:
            ok = pred(chr(cp))
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(f, name, ranges):
    f.write(f"const cp_range {name}[] = {{\n")
    for i in range(0, len(ranges), 4):
        row = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in ranges[i : i + 4])
        f.write(f"    {row},\n")
    f.write("};\n")
    f.write(f"const std::size_t {name}_count = {len(ranges)};\n\n")


def main():
    letters = ranges_for(is_letter)
    numbers = ranges_for(is_number)
    spaces = ranges_for(is_space)
    path = sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.cpp"
    with open(path, "w") as f:
        f.write("// Generated by tools/gen_unicode_tables.py. Do not edit by hand.\n")
        f.write('#include "picl/unicode.hpp"\n\n')
        f.write("namespace picl::detail {\n\n")
        emit(f, "kLetterRanges", letters)
        emit(f, "kNumberRanges", numbers)
        emit(f, "kSpaceRanges", spaces)
        f.write("} // namespace picl::detail\n")
    print(f"letters={len(letters)} numbers={len(numbers)} spaces={len(spaces)} -> {path}")


if __name__ == "__main__":
    main()
