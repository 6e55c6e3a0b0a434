"""Test commands for fn-lab."""

import sys

from . import utils


def test_python(keyword: str | None = None, quiet: bool = False) -> bool:
    """Run the pytest suite under scripts/tests."""
    project_root = utils.get_project_root()
    tests_dir = project_root / "scripts" / "tests"

    utils.print_header("Running Python Tests", f"-k {keyword}" if keyword else None)

    if not tests_dir.exists():
        print(f"\nERROR: Test directory not found: {tests_dir}")
        return False

    test_cmd = [sys.executable, "-m", "pytest", str(tests_dir)]
    if keyword:
        test_cmd.extend(["-k", keyword])
    if quiet:
        test_cmd.append("-q")

    success, _ = utils.run_command(test_cmd, "pytest", cwd=project_root)
    utils.report(success, "All tests passed!" if success else "Tests failed")
    return success
