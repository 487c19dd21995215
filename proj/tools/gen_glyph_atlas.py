#!/usr/bin/env python3
"""Regenerates src/corpus/glyph_atlas_data.inc from DejaVu Sans Mono.

Each printable ASCII character (0x20-0x7E) is rendered into a fixed cell and
binarized, for the regular and bold faces.

    python3 tools/gen_glyph_atlas.py [--size 14] > src/corpus/glyph_atlas_data.inc
"""
import argparse
import sys

from PIL import Image, ImageDraw, ImageFont

FONT_DIR = "/usr/share/fonts/truetype/dejavu"
FACES = {"regular": "DejaVuSansMono.ttf", "bold": "DejaVuSansMono-Bold.ttf"}


def render(font, ch, width, height):
    img = Image.new("L", (width, height), 255)
    ImageDraw.Draw(img).text((0, 0), ch, font=font, fill=0)
    rows = []
    for y in range(height):
        rows.append("".join("#" if img.getpixel((x, y)) < 128 else "." for x in range(width)))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=14)
    args = ap.parse_args()

    regular = ImageFont.truetype(f"{FONT_DIR}/{FACES['regular']}", args.size)
    ascent, descent = regular.getmetrics()
    width = int(regular.getlength("M")) + 1
    height = ascent + descent

    out = sys.stdout
    out.write("// Generated by tools/gen_glyph_atlas.py; do not edit.\n")
    out.write(f"// DejaVu Sans Mono, {args.size}px, binarized at 50%.\n\n")
    out.write(f"constexpr int kGlyphWidth = {width};\n")
    out.write(f"constexpr int kGlyphHeight = {height};\n\n")
    for face, file in FACES.items():
        font = ImageFont.truetype(f"{FONT_DIR}/{file}", args.size)
        out.write(f"constexpr const char* kGlyphs_{face}[95][kGlyphHeight] = {{\n")
        for code in range(0x20, 0x7F):
            ch = chr(code)
            label = repr(ch)
            rows = render(font, ch, width, height)
            out.write(f"    {{  // {label}\n")
            for r in rows:
                out.write(f'        "{r}",\n')
            out.write("    },\n")
        out.write("};\n\n")


if __name__ == "__main__":
    main()
