#!/usr/bin/env python3
"""Regenerate the cross-component conformance fixtures in fixtures/.

Run from the repository root. The fixtures are committed, so regeneration
is only needed after a deliberate format change.
"""

import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from smlrt.bench import BenchConfig, run_stencil  # noqa: E402
from smlrt.models import jacobi_model, save_model  # noqa: E402
from smlrt.models import DenseLayer, Model  # noqa: E402

import numpy as np  # noqa: E402


def main():
    fixtures = ROOT / "fixtures"
    if fixtures.exists():
        shutil.rmtree(fixtures)
    fixtures.mkdir()

    db = fixtures / "srdb_stencil_4x4"
    run_stencil(
        BenchConfig(
            app="stencil", mode="collect", steps=3, n=4, m=4,
            db_path=str(db), seed=0, dtype="f32",
        )
    )
    (db / ".lock").unlink(missing_ok=True)

    save_model(jacobi_model(0.25), fixtures / "model_jacobi_alpha25")

    ident = Model(
        5, 5,
        [DenseLayer(np.eye(5, dtype=np.float32),
                    np.zeros(5, dtype=np.float32), "identity")],
    )
    save_model(ident, fixtures / "model_identity5")
    print(f"fixtures written under {fixtures}")


if __name__ == "__main__":
    main()
