"""
Sonuç klasörlerindeki manifest.json özetlerini doğrulayan script
"""
import argparse
import json
import sys
from pathlib import Path

from dotenv import load_dotenv

# .env dosyasını yükle
load_dotenv()

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from pumpsim.core.constants import MANIFEST_FILENAME  # noqa: E402
from pumpsim.storage.repositories import verify_manifest  # noqa: E402

parser = argparse.ArgumentParser(description="Verify result manifests")
parser.add_argument("paths", nargs="*", default=["results"], help="Result directories to search")


def main() -> int:
    args = parser.parse_args()
    manifests = []
    for root in args.paths:
        manifests += sorted(Path(root).rglob(MANIFEST_FILENAME))

    if not manifests:
        print("⚠️  Hiç manifest bulunamadı")
        return 1

    bad = 0
    for manifest in manifests:
        folder = manifest.parent
        data = json.loads(manifest.read_text(encoding="utf-8"))
        mismatched = verify_manifest(folder)
        status = "✅" if not mismatched else "❌"
        print(f"{status} {folder} ({data['command']}, {len(data['files'])} dosya, {data['duration_seconds']} s)")
        for name in mismatched:
            print(f"    değişmiş veya eksik: {name}")
        bad += bool(mismatched)

    print("-" * 50)
    print(f"Toplam: {len(manifests)} manifest, hatalı: {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
