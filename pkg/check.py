#!/usr/bin/env python3
"""
Environment self-check for the ISAC simulator

    python check.py

Confirms the numerical stack imports, the scenario file loads and the core
reproduces a handful of hand-computed values. Exit status 1 on any failure.
"""

import importlib
import sys
from pathlib import Path
from typing import Callable, Dict, List, Tuple

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT))

REQUIRED_MODULES = [
    ("numpy", "array computing"),
    ("scipy", "Cholesky factors and the HiGHS LP solver"),
    ("pandas", "CSV results"),
    ("pydantic", "scenario validation"),
    ("pydantic_settings", "process settings"),
    ("fastapi", "evaluation service"),
    ("uvicorn", "ASGI server"),
    ("httpx", "service smoke test"),
]
OPTIONAL_MODULES = [("cvxpy", "conic cross-check backend")]

REQUIRED_FILES = [
    "app/cli.py",
    "app/main.py",
    "app/exceptions.py",
    "app/models/config.py",
    "app/models/models.py",
    "app/services/feasibility.py",
    "app/services/power.py",
    "app/services/oracle.py",
    "app/utils/logging.py",
    "workers/pool.py",
    "workers/tasks.py",
    "config/settings.py",
    "config/isac.example.conf",
]


class SystemChecker:
    def __init__(self):
        self.status: Dict[str, bool] = {}
        self.warnings: List[str] = []
        self.errors: List[str] = []

    def check_imports(self) -> bool:
        print("🔍 Checking imports...")
        ok = True
        for module_name, purpose in REQUIRED_MODULES + OPTIONAL_MODULES:
            optional = (module_name, purpose) in OPTIONAL_MODULES
            try:
                importlib.import_module(module_name)
                print(f"  ✅ {module_name} ({purpose})")
            except ImportError as e:
                if optional:
                    print(f"  ⚠️ {module_name} ({purpose}, optional)")
                    self.warnings.append(f"optional module {module_name} not installed")
                else:
                    print(f"  ❌ {module_name} ({purpose})")
                    self.errors.append(f"{module_name}: {e}")
                    ok = False
        return ok

    def check_project_structure(self) -> bool:
        print("\n📁 Checking project structure...")
        missing = [name for name in REQUIRED_FILES if not (ROOT / name).exists()]
        for name in REQUIRED_FILES:
            print(f"  {'❌' if name in missing else '✅'} {name}")
        self.errors.extend(f"missing file: {name}" for name in missing)
        return not missing

    def check_configuration(self) -> bool:
        print("\n⚙️ Checking configuration...")
        from app.models.config import SystemConfig, load_config_file
        from config.settings import settings

        print(f"  ✅ Worker processes: {settings.threads} (ISAC_THREADS)")
        print(f"  ✅ Output directory: {settings.output_dir}")
        config = load_config_file(ROOT / "config/isac.example.conf")
        print(f"  ✅ Example scenario: M={config.M}, N={config.N}, K_d={config.K_d}, kappa={config.kappa:g}")
        if config != SystemConfig():
            self.warnings.append("config/isac.example.conf differs from the built-in defaults")
        if not (ROOT / ".env").exists():
            print("  ⚠️ no .env file, using defaults")
        return True

    def check_numerics(self) -> bool:
        print("\n🧮 Checking numerical core...")
        import numpy as np

        from app.models.config import SystemConfig
        from app.models.models import ModeAssignment, NetworkRealization
        from app.services import metrics
        from app.services.power import npc_allocation
        from app.services.topology import path_loss_dB

        config = SystemConfig()
        net = NetworkRealization.from_statistics(beta=[[1.0], [1.0]], gamma=[[0.5], [0.5]], antennas=2)
        a = ModeAssignment(np.array([1, 0]))
        p = npc_allocation(net, a, config)

        checks: List[Tuple[str, Callable[[], bool]]] = [
            ("path loss at 5 m is -81.205 dB", lambda: abs(path_loss_dB(0.005, config) + 81.205) < 1e-3),
            ("path loss at 500 m is -130.18 dB", lambda: abs(path_loss_dB(0.5, config) + 130.18) < 1e-2),
            ("full-power allocation fills the cap", lambda: abs(p.eta_com[0, 0] - 1.0) < 1e-12 and p.eta_sen[1] == 1.0),
            ("audit accepts it without a sensing target",
             lambda: metrics.audit_allocation(net, a, p, config.with_overrides(kappa=0.0)).ok),
        ]
        ok = True
        for description, check in checks:
            passed = bool(check())
            print(f"  {'✅' if passed else '❌'} {description}")
            if not passed:
                self.errors.append(f"numerical check failed: {description}")
                ok = False
        return ok

    def run_all_checks(self) -> bool:
        print("🔧 Cell-Free ISAC Simulator - System Check")
        print("=" * 50)

        for name, check in [
            ("imports", self.check_imports),
            ("structure", self.check_project_structure),
            ("configuration", self.check_configuration),
            ("numerics", self.check_numerics),
        ]:
            try:
                self.status[name] = check()
            except Exception as e:
                print(f"  ❌ {name} check raised {type(e).__name__}: {e}")
                self.errors.append(f"{name}: {e}")
                self.status[name] = False

        passed = all(self.status.values())
        overall = "❌ FAIL" if not passed else ("⚠️ WARNING" if self.warnings else "✅ PASS")

        print("\n" + "=" * 50)
        print(f"📊 Overall Status: {overall}")
        for name, ok in self.status.items():
            print(f"  {name.title()}: {'✅ PASS' if ok else '❌ FAIL'}")
        for warning in self.warnings:
            print(f"  ⚠️ {warning}")
        for error in self.errors:
            print(f"  ❌ {error}")

        if passed:
            print("\n🚀 Ready: 'isac-sim run --scheme gap-npc --drops 10' or 'isac-sim serve'")
        return passed


def main():
    sys.exit(0 if SystemChecker().run_all_checks() else 1)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("\n👋 System check cancelled by user")
        sys.exit(1)
