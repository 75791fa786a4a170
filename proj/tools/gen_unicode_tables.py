#!/usr/bin/env python3
"""Regenerates src/unicode_tables.cpp from Python's unicodedata.

Emits three sorted tables:
  * punctuation ranges (general category P*),
  * White_Space ranges,
  * simple one-to-one lowercase mappings whose targets are fixed points.
"""
import sys
import unicodedata

WHITESPACE = [
    0x0009, 0x000A, 0x000B, 0x000C, 0x000D, 0x0020, 0x0085, 0x00A0, 0x1680,
    *range(0x2000, 0x200B), 0x2028, 0x2029, 0x202F, 0x205F, 0x3000,
]


def ranges(pred):
    out, start = [], None
    for cp in range(0x110000):
        if pred(cp):
            if start is None:
                start = cp
        elif start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def lower_pairs():
    pairs = []
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        lo = chr(cp).lower()
        if len(lo) != 1 or ord(lo) == cp:
            continue
        if lo.lower() != lo:
            continue
        pairs.append((cp, ord(lo)))
    return pairs


def main(out_path):
    punct = ranges(lambda cp: unicodedata.category(chr(cp)).startswith("P"))
    ws_set = set(WHITESPACE)
    ws = ranges(lambda cp: cp in ws_set)
    lower = lower_pairs()
    with open(out_path, "w", encoding="utf-8") as f:
        f.write("// Generated by tools/gen_unicode_tables.py "
                f"(Unicode {unicodedata.unidata_version}). Do not edit.\n\n")
        f.write('#include "unicode_tables.hpp"\n\nnamespace neardup::unicode {\n\n')
        f.write("namespace {\n\nconst CodepointRange kPunctuation[] = {\n")
        for a, b in punct:
            f.write(f"    {{0x{a:X}, 0x{b:X}}},\n")
        f.write("};\n\n")
        f.write("const CodepointRange kWhitespace[] = {\n")
        for a, b in ws:
            f.write(f"    {{0x{a:X}, 0x{b:X}}},\n")
        f.write("};\n\n")
        f.write("const CaseMapping kLowercase[] = {\n")
        for a, b in lower:
            f.write(f"    {{0x{a:X}, 0x{b:X}}},\n")
        f.write("};\n\n}  // namespace\n\n")
        f.write("std::span<const CodepointRange> punctuation_ranges() { return kPunctuation; }\n")
        f.write("std::span<const CodepointRange> whitespace_ranges() { return kWhitespace; }\n")
        f.write("std::span<const CaseMapping> lowercase_mappings() { return kLowercase; }\n\n")
        f.write("}  // namespace neardup::unicode\n")
    sys.stdout.write(f"P*={len(punct)} ranges, WS={len(ws)} ranges, lower={len(lower)} pairs\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.cpp")
