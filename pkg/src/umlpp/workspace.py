"""Revisioned session around one project.

All mutations funnel through ``mutate``, which serializes writers, bumps the
revision, refreshes derived slots, produces the fresh report/monitor pair and
(by default) writes the document back to disk. Reads take the same lock
briefly, so every caller observes a consistent snapshot.
"""

from __future__ import annotations

import copy
import threading
from pathlib import Path
from typing import Callable, Optional

from umlpp import document, engine
from umlpp.model import DiagramLayout, DiagramNode, Project


class Workspace:
    def __init__(self, project: Project, layouts: list[DiagramLayout],
                 path: Optional[Path] = None, autosave: bool = True):
        self.project = project
        self.layouts = layouts
        self.path = Path(path) if path is not None else None
        self.autosave = autosave and path is not None
        self.lock = threading.RLock()
        self.revision = 0
        self.transactions: list[engine.MutationTransaction] = []
        engine.recompute_derived(project)
        self.report, self.monitors = engine.full_report(project, self.revision)

    @classmethod
    def open(cls, path, autosave: bool = True) -> "Workspace":
        project, layouts = document.load(Path(path).read_bytes())
        return cls(project, layouts, path=Path(path), autosave=autosave)

    def mutate(self, fn: Callable[[Project], object], op: str = "",
               arguments: str = ""):
        """Apply one mutation (possibly a compound of kernel edits). Returns
        (result, revision, report, monitors); on any error the whole step,
        layout edits included, is rolled back and no revision is consumed."""
        with self.lock:
            snap = self.project.snapshot()
            layouts_snap = copy.deepcopy(self.layouts)
            try:
                result = fn(self.project)
            except Exception:
                self.project.restore(snap)
                self.layouts[:] = layouts_snap
                raise
            self.revision += 1
            self._prune_layouts()
            txn = engine.MutationTransaction(
                op or getattr(fn, "__name__", "mutation"), arguments,
                self.revision)
            self.transactions.append(txn)
            self.report, self.monitors = engine.after_mutation(
                self.project, txn)
            if self.autosave:
                self.save()
            return result, self.revision, self.report, self.monitors

    def _prune_layouts(self) -> None:
        # deleting an element must also drop its diagram nodes, or the saved
        # document would no longer load
        for layout in self.layouts:
            layout.nodes = [
                n for n in layout.nodes
                if n.element in self.project.classes
                or n.element in self.project.objects
            ]

    def read(self, fn: Callable[[Project], object]):
        with self.lock:
            return fn(self.project)

    def save(self) -> bytes:
        with self.lock:
            data = document.save(self.project, self.layouts)
            if self.path is not None:
                self.path.write_bytes(data)
            return data

    # -- diagram layout -----------------------------------------------------

    def place_node(self, diagram: str, element: str, x: int, y: int):
        """Create or move a node; the diagram is created on first use."""
        def fn(project: Project):
            project.element(element)  # raises UnknownElement
            layout = next((d for d in self.layouts if d.name == diagram), None)
            if layout is None:
                layout = DiagramLayout(diagram)
                self.layouts.append(layout)
            node = next((n for n in layout.nodes if n.element == element), None)
            if node is None:
                node = DiagramNode(element, x, y)
                layout.nodes.append(node)
            else:
                node.x, node.y = x, y
            return node
        return self.mutate(fn, op="place_node", arguments=f"{diagram}/{element}")
