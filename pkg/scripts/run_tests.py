#!/usr/bin/env python3
"""
Test runner script for treeld.
Provides convenient commands for running different test suites.
"""
import argparse
import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def run_command(cmd: list[str], description: str, env: dict[str, str]) -> int:
    """Run command and return exit code."""
    print(f"🚀 {description}")
    print(f"Running: {' '.join(cmd)}")
    print("-" * 50)

    result = subprocess.run(cmd, cwd=ROOT, env=env)

    if result.returncode == 0:
        print(f"✅ {description} - PASSED")
    else:
        print(f"❌ {description} - FAILED")

    return result.returncode


def main():
    parser = argparse.ArgumentParser(description="treeld Test Runner")
    parser.add_argument(
        "suite",
        choices=["unit", "api", "slow", "oracle", "all"],
        help="Test suite to run",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    parser.add_argument(
        "--workers",
        "-w",
        type=int,
        help="Worker processes for the Monte Carlo tests (sets TREELD_WORKERS)",
    )

    args = parser.parse_args()

    env = dict(os.environ)
    if args.workers:
        env["TREELD_WORKERS"] = str(args.workers)

    # Base pytest command
    base_cmd = [sys.executable, "-m", "pytest"]

    if args.verbose:
        base_cmd.append("-v")

    # Define test suites
    test_commands = {
        "unit": {
            "cmd": base_cmd + ["tests/", "-m", "not api and not slow"],
            "desc": "Running unit tests",
        },
        "api": {
            "cmd": base_cmd + ["tests/", "-m", "api"],
            "desc": "Running theory API tests",
        },
        "slow": {
            "cmd": base_cmd + ["tests/", "-m", "slow"],
            "desc": "Running Monte Carlo acceptance tests",
            "env": {"TREELD_SLOW": "1"},
        },
        "oracle": {
            "cmd": [sys.executable, "-m", "treeld.cli", "oracle"],
            "desc": "Running the oracle suite",
        },
        "all": {
            "cmd": base_cmd + ["tests/"],
            "desc": "Running all tests",
            "env": {"TREELD_SLOW": "1"},
        },
    }

    # Run selected test suite
    suite_config = test_commands[args.suite]
    exit_code = run_command(
        suite_config["cmd"], suite_config["desc"], {**env, **suite_config.get("env", {})}
    )

    # Print summary
    if exit_code == 0:
        print("\n🎉 All tests passed!")
    else:
        print(f"\n💥 Some tests failed (exit code: {exit_code})")

    return exit_code


if __name__ == "__main__":
    sys.exit(main())
