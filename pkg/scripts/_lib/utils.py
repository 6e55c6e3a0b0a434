"""Common utility functions for the fn-lab tooling."""

import subprocess
from pathlib import Path

RULE_WIDTH = 60


def get_project_root() -> Path:
    """Get the project root directory (resolves symlinks)."""
    script_dir = Path(__file__).resolve().parent.parent
    return script_dir.parent


def print_header(title: str, mode: str | None = None) -> None:
    """Print a '#'-framed section header."""
    print(f"\n{'#' * RULE_WIDTH}")
    print(f"#  {title}")
    if mode:
        print(f"#  Mode: {mode}")
    print(f"{'#' * RULE_WIDTH}")


def print_banner(title: str) -> None:
    """Print an '='-framed summary banner."""
    print(f"\n{'=' * RULE_WIDTH}")
    print(f"  {title}")
    print(f"{'=' * RULE_WIDTH}")


def print_step(index: int, total: int, text: str) -> None:
    """Print an [i/n] step line."""
    print(f"\n[{index}/{total}] {text}")


def report(ok: bool, text: str) -> None:
    """Print an [OK]/[FAIL] result line."""
    print(f"  [{'OK' if ok else 'FAIL'}] {text}")


def info(text: str) -> None:
    print(f"  [INFO] {text}")


def print_summary(errors: int) -> None:
    """Print the closing banner of a multi-check command."""
    if errors == 0:
        print_banner("ALL CHECKS PASSED [OK]")
    else:
        print_banner(f"{errors} CHECK(S) FAILED [FAIL]")


def print_counterexample(counterexample: dict[str, object]) -> None:
    print("  Counterexample:")
    for key in sorted(counterexample):
        print(f"    {key}: {counterexample[key]}")


def run_command(cmd: list[str], description: str, cwd: Path | None = None) -> tuple[bool, str]:
    """Run a command with inherited output; return success and an error message."""
    print(f"\n{'=' * RULE_WIDTH}")
    print(f"  {description}")
    print(f"  Command: {' '.join(cmd)}")
    if cwd:
        print(f"  Working directory: {cwd}")
    print(f"{'=' * RULE_WIDTH}\n")

    try:
        result = subprocess.run(cmd, cwd=cwd)
    except FileNotFoundError:
        print(f"ERROR: Command not found: {cmd[0]}")
        return False, f"Command not found: {cmd[0]}"
    except OSError as e:
        print(f"ERROR: Failed to execute command: {e}")
        return False, str(e)
    return result.returncode == 0, ""
