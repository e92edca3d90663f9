"""
configs/ altındaki tüm tarifleri sırayla çalıştıran script
"""
import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv

# .env dosyasını yükle
load_dotenv()

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from pumpsim.core.config import load_run_config  # noqa: E402
from pumpsim.main import main as cli_main  # noqa: E402

parser = argparse.ArgumentParser(description="Run every checked-in figure recipe")
parser.add_argument("--configs", default="configs", help="Directory with INI recipes")
parser.add_argument("--only", help="Comma-separated recipe names (without .ini)")
parser.add_argument("--samples", type=int, help="Override the ensemble size of every recipe")
parser.add_argument("--workers", type=int, help="Worker processes")


def main() -> int:
    args = parser.parse_args()
    recipes = sorted(Path(args.configs).glob("*.ini"))
    if args.only:
        wanted = {name.strip() for name in args.only.split(",")}
        recipes = [r for r in recipes if r.stem in wanted]

    if not recipes:
        print(f"⚠️  {args.configs} içinde tarif bulunamadı")
        return 2

    failed = []
    for recipe in recipes:
        experiment = load_run_config(recipe).run.experiment
        argv = [experiment, "--config", str(recipe)]
        if args.samples:
            argv += ["--samples", str(args.samples)]
        if args.workers:
            argv += ["--workers", str(args.workers)]

        print(f"▶ {recipe.name} ({experiment})")
        code = cli_main(argv)
        if code != 0:
            print(f"❌ {recipe.name} çıkış kodu {code}")
            failed.append(recipe.name)

    print("-" * 50)
    print(f"Toplam: {len(recipes)} tarif, başarısız: {len(failed)}")
    for name in failed:
        print(f"  - {name}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
