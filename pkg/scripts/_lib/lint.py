"""Lint commands for fn-lab."""

import shutil
import subprocess

from . import utils


def _echo(result: subprocess.CompletedProcess[str]) -> None:
    if result.stdout:
        print(result.stdout)
    if result.stderr:
        print(result.stderr)


def lint_python(fix: bool = False) -> bool:
    """Lint Python code with Ruff."""
    project_root = utils.get_project_root()
    scripts_dir = project_root / "scripts"

    utils.print_header("Linting Python", "Auto-fix" if fix else None)

    ruff = shutil.which("ruff")
    if not ruff:
        print("\nERROR: ruff not found")
        print("Install: uv pip install ruff")
        return False

    try:
        result = subprocess.run([ruff, "--version"], capture_output=True, encoding="utf-8")
        print(f"\n{result.stdout.strip()}")
    except Exception:
        pass

    utils.print_step(1, 2, "Linting...")
    check_cmd = [ruff, "check", str(scripts_dir)]
    if fix:
        check_cmd.append("--fix")
    result_check = subprocess.run(check_cmd, capture_output=True, encoding="utf-8")
    _echo(result_check)

    utils.print_step(2, 2, "Formatting...")
    format_cmd = [ruff, "format", str(scripts_dir)]
    if not fix:
        format_cmd.insert(2, "--check")
    result_format = subprocess.run(format_cmd, capture_output=True, encoding="utf-8")
    _echo(result_format)

    ok = result_check.returncode == 0 and result_format.returncode == 0
    utils.report(ok, "Python lint passed!" if ok else "Python lint failed")
    if not ok and not fix:
        print("Run with --fix to auto-format")
    return ok
