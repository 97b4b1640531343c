#!/usr/bin/env python3
"""
Smoke test for a running evaluation service

    python scripts/smoke_api.py http://localhost:8000
"""

import asyncio
import sys
from typing import Dict

import httpx

TIMEOUT = httpx.Timeout(120.0)


class ServiceTester:
    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip('/')

    async def test_health_check(self) -> bool:
        """Test health endpoint"""
        try:
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.get(f"{self.base_url}/health")

                if response.status_code == 200:
                    data = response.json()
                    print("✅ Health check passed")
                    print(f"   Status: {data.get('status')}")
                    print(f"   Version: {data.get('version')}")
                    print(f"   Limits: {data.get('limits')}")
                    return True
                print(f"❌ Health check failed: {response.status_code}")
                return False
        except Exception as e:
            print(f"❌ Health check error: {e}")
            return False

    async def test_config_defaults(self) -> bool:
        try:
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.get(f"{self.base_url}/api/config/defaults")

                if response.status_code == 200:
                    config = response.json().get("config", {})
                    print("✅ Config defaults passed")
                    print(f"   M={config.get('M')} N={config.get('N')} K_d={config.get('K_d')} kappa={config.get('kappa')}")
                    return True
                print(f"❌ Config defaults failed: {response.status_code}")
                return False
        except Exception as e:
            print(f"❌ Config defaults error: {e}")
            return False

    async def test_evaluate(self) -> bool:
        """Greedy selection with full-power allocation on a small drop"""
        try:
            payload = {"seed": 1, "overrides": {"M": 8, "K_d": 2, "kappa": 1.0}, "selection": "greedy", "power": "npc"}
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.post(f"{self.base_url}/api/metrics/evaluate", json=payload)

                if response.status_code == 200:
                    data = response.json()
                    print("✅ Metrics evaluation passed")
                    print(f"   Communication APs: {data.get('com_aps')}")
                    print(f"   Min SE: {data.get('report', {}).get('min_se')}")
                    print(f"   Audit ok: {data.get('audit', {}).get('ok')}")
                    return True
                print(f"❌ Metrics evaluation failed: {response.status_code}")
                print(f"   Response: {response.text}")
                return False
        except Exception as e:
            print(f"❌ Metrics evaluation error: {e}")
            return False

    async def test_rejects_bad_config(self) -> bool:
        try:
            payload = {"overrides": {"N": 0}}
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.post(f"{self.base_url}/api/metrics/evaluate", json=payload)

                if response.status_code == 422:
                    print("✅ Invalid configuration rejected")
                    print(f"   Detail: {response.json().get('detail')}")
                    return True
                print(f"❌ Invalid configuration not rejected: {response.status_code}")
                return False
        except Exception as e:
            print(f"❌ Invalid configuration error: {e}")
            return False

    async def test_experiment(self) -> bool:
        try:
            payload = {"scheme": "gap-npc", "drops": 2, "seed": 0, "overrides": {"M": 8, "K_d": 2, "kappa": 1.0}}
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.post(f"{self.base_url}/api/experiments/run", json=payload)

                if response.status_code == 200:
                    summary = response.json().get("summary", {})
                    print("✅ Experiment passed")
                    print(f"   Mean min-SE: {summary.get('mean_min_se')}")
                    print(f"   Infeasible drops: {summary.get('infeasible_drops')}")
                    return True
                print(f"❌ Experiment failed: {response.status_code}")
                return False
        except Exception as e:
            print(f"❌ Experiment error: {e}")
            return False

    async def test_oracle(self) -> bool:
        try:
            payload = {"seed": 0, "trials": 2000, "tolerance": 0.1, "overrides": {"M": 6, "K_d": 2}}
            async with httpx.AsyncClient(timeout=TIMEOUT) as client:
                response = await client.post(f"{self.base_url}/api/oracle/verify", json=payload)

                if response.status_code == 200:
                    data = response.json()
                    print("✅ Oracle verification passed" if data.get("passed") else "⚠️  Oracle tolerance exceeded")
                    print(f"   Worst: {data.get('worst')}")
                    return True
                print(f"❌ Oracle verification failed: {response.status_code}")
                return False
        except Exception as e:
            print(f"❌ Oracle verification error: {e}")
            return False

    async def run_all_tests(self) -> Dict[str, bool]:
        """Run all service tests"""
        print(f"🚀 Testing service at: {self.base_url}\n")

        tests = [
            ("Health Check", self.test_health_check),
            ("Config Defaults", self.test_config_defaults),
            ("Metrics Evaluation", self.test_evaluate),
            ("Invalid Configuration", self.test_rejects_bad_config),
            ("Experiment", self.test_experiment),
            ("Oracle Verification", self.test_oracle),
        ]

        results = {}
        for test_name, test_func in tests:
            print(f"\n🧪 Running {test_name}...")
            try:
                results[test_name] = await test_func()
            except Exception as e:
                print(f"❌ {test_name} failed with exception: {e}")
                results[test_name] = False
        return results

    def print_summary(self, results: Dict[str, bool]):
        passed = sum(results.values())
        total = len(results)

        print(f"\n{'='*50}")
        print("🎯 SERVICE TEST SUMMARY")
        print(f"{'='*50}")
        print(f"Passed: {passed}/{total}")
        print(f"Success rate: {passed/total*100:.1f}%")

        if passed == total:
            print("🎉 All tests passed!")
        else:
            print("⚠️  Some tests failed. Check the issues above.")
        print(f"{'='*50}")


async def main():
    if len(sys.argv) != 2:
        print("Usage: python scripts/smoke_api.py <base_url>")
        print("Example: python scripts/smoke_api.py http://localhost:8000")
        sys.exit(1)

    tester = ServiceTester(sys.argv[1])
    results = await tester.run_all_tests()
    tester.print_summary(results)

    if not all(results.values()):
        sys.exit(1)


if __name__ == "__main__":
    asyncio.run(main())
