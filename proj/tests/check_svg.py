"""Checks rendered SVGs: every file parses, and trajectory.svg has one piece path per trajectory piece."""
import pathlib
import sys
import xml.etree.ElementTree as ET

NS = "{http://www.w3.org/2000/svg}"


def pieces_in(trajectory_txt: pathlib.Path) -> int:
    for line in trajectory_txt.read_text().splitlines():
        parts = line.split()
        if parts and parts[0].rstrip(":") == "pieces":
            return int(parts[1])
    raise SystemExit(f"no piece count in {trajectory_txt}")


def main() -> int:
    out = pathlib.Path(sys.argv[1])
    svgs = sorted(out.glob("*.svg"))
    if not svgs:
        print(f"no SVG files in {out}")
        return 1
    for svg in svgs:
        ET.parse(svg)
    root = ET.parse(out / "trajectory.svg").getroot()
    paths = [p for p in root.iter() if p.tag in ("path", NS + "path")
             and p.get("class", "").split()[:1] == ["piece"]]
    expected = pieces_in(out / "trajectory.txt")
    print(f"{len(svgs)} SVG files parsed; {len(paths)} piece paths, {expected} pieces")
    return 0 if len(paths) == expected else 1


if __name__ == "__main__":
    sys.exit(main())
