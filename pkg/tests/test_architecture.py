"""Dependency audit: only ``kinar.io`` and ``kinar.cli`` may touch files or the console."""
import ast
from pathlib import Path

import pytest

import kinar

PACKAGE = Path(kinar.__file__).parent
CORE = ("geometry", "camera", "pose_solver", "error_model", "rig_sim", "scene", "report", "errors")
FORBIDDEN_MODULES = {"logging", "sys", "os", "pathlib", "csv", "io", "shutil", "subprocess", "tempfile", "yaml", "argparse"}
FORBIDDEN_CALLS = {"open", "print", "input"}
FORBIDDEN_SIBLINGS = {"io", "cli"}


def imports(tree):
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                yield alias.name.split(".")[0], 0
        elif isinstance(node, ast.ImportFrom):
            if node.level:
                yield from (((node.module or alias.name).split(".")[0], node.level) for alias in node.names)
            else:
                yield node.module.split(".")[0], 0


@pytest.mark.parametrize("name", CORE)
def test_core_module_does_no_io(name):
    tree = ast.parse((PACKAGE / f"{name}.py").read_text())
    for module, level in imports(tree):
        if level:
            assert module not in FORBIDDEN_SIBLINGS, f"{name} imports kinar.{module}"
        else:
            assert module not in FORBIDDEN_MODULES, f"{name} imports {module}"
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            assert node.func.id not in FORBIDDEN_CALLS, f"{name} calls {node.func.id}()"
        if isinstance(node, ast.Attribute):
            assert node.attr not in {"read_text", "write_text", "read_bytes", "write_bytes"}, f"{name} uses .{node.attr}"


def test_every_module_is_classified():
    modules = {p.stem for p in PACKAGE.glob("*.py")} - {"__init__", "__main__"}
    assert modules == set(CORE) | FORBIDDEN_SIBLINGS


def test_audit_catches_violation():
    tree = ast.parse("import logging\nfrom . import io\nprint('x')\n")
    found = list(imports(tree))
    assert ("logging", 0) in found and ("io", 1) in found
