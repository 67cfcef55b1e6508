"""Write the option reference to docs/defaults.md."""

import pathlib

from bilip.config import defaults_markdown

if __name__ == "__main__":
    path = pathlib.Path(__file__).resolve().parents[1] / "docs" / "defaults.md"
    path.parent.mkdir(exist_ok=True)
    path.write_text(defaults_markdown() + "\n", encoding="utf-8")
    print(f"wrote {path}")
