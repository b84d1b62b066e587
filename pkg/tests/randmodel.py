"""Seeded random model builder and mutation driver for the acceptance suite.

Every pick is drawn from the supplied Random instance, so a sequence is fully
reproducible from its seed. Mutations that the kernel legitimately rejects
(cycles, clashes, duplicates) count as skipped, not failed.
"""

import random
from datetime import date, timedelta
from decimal import Decimal

from umlpp import kernel
from umlpp.errors import ModelError
from umlpp.model import Multiplicity, Project, TypeRef
from umlpp.values import EnumValue, Money, ObjectRef

SCALAR_TYPES = ("Integer", "Float", "String", "Boolean", "Date",
                "MonetaryValue")
MULT_MENU = (Multiplicity(0, None), Multiplicity(0, 1), Multiplicity(1, 1),
             Multiplicity(1, None), Multiplicity(2, 3))

MAX_OBJECTS = 8
MAX_CLASSES = 6


class Driver:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # -- seed ------------------------------------------------------------

    def seed_project(self) -> Project:
        p = Project("randomized")
        alpha = kernel.create_class(p, self.fresh("Alpha"))
        kernel.add_attribute(p, alpha.id, "amount",
                             TypeRef.datatype("MonetaryValue"))
        kernel.add_attribute(p, alpha.id, "count",
                             TypeRef.datatype("Integer"))
        kernel.add_constraint(p, alpha.id, "nonNegative", "self.count >= 0",
                              "'count is negative'")
        beta = kernel.create_class(p, self.fresh("Beta"))
        kernel.add_attribute(p, beta.id, "label", TypeRef.datatype("String"))
        kernel.create_association(
            p, self.fresh("Rel"),
            (alpha.id, self.fresh("many"), Multiplicity(0, None)),
            (beta.id, self.fresh("one"), Multiplicity(1, 1)))
        a1 = kernel.instantiate(p, alpha.id, self.fresh("obj"))
        kernel.set_slot(p, a1.id, "count", 3)
        kernel.instantiate(p, beta.id, self.fresh("obj"))
        return p

    # -- random pieces ------------------------------------------------------

    def random_value(self, p: Project, tref: TypeRef):
        rng = self.rng
        if tref.kind == "enumeration":
            enum = p.enumerations.get(tref.ref)
            if enum is None:
                return None
            return EnumValue(enum.id, rng.choice(enum.literals))
        if tref.kind == "class":
            pool = p.instances_of(tref.ref)
            return ObjectRef(rng.choice(pool).id) if pool else None
        name = tref.name
        if name == "Integer":
            return rng.randint(-5, 10)
        if name == "Float":
            return round(rng.uniform(-5.0, 10.0), 3)
        if name == "String":
            return rng.choice(["lo", "mid", "hi"]) + str(rng.randint(0, 9))
        if name == "Boolean":
            return rng.random() < 0.5
        if name == "Date":
            return date(2024, 1, 1) + timedelta(days=rng.randint(0, 900))
        if name == "MonetaryValue":
            cents = Decimal(rng.randint(-99900, 99900)) / 100
            return Money(cents, rng.choice(("EUR", "USD")))
        return None

    def random_typeref(self, p: Project) -> TypeRef:
        rng = self.rng
        roll = rng.random()
        if roll < 0.15 and p.enumerations:
            return TypeRef.enumeration(rng.choice(list(p.enumerations)))
        if roll < 0.25 and p.classes:
            return TypeRef.to_class(rng.choice(list(p.classes)))
        return TypeRef.datatype(rng.choice(SCALAR_TYPES))

    def derivation_for(self, p: Project, cls, tref: TypeRef) -> str | None:
        rng = self.rng
        if tref.kind == "enumeration":
            enum = p.enumerations[tref.ref]
            return f"{enum.name}::{rng.choice(enum.literals)}"
        if tref.kind != "datatype":
            return None
        numeric = [a for a in p.effective_attributes(cls.id)
                   if not a.derived and a.type.kind == "datatype"
                   and a.type.name == "Integer"]
        fixed = {
            "Integer": "1 + 1" if not numeric
                       else f"self.{rng.choice(numeric).name} * 2",
            "Float": "1.5 * 2.0",
            "String": "'x' + 'y'",
            "Boolean": "true",
            "Date": "@2024-01-01",
            "MonetaryValue": "1.00 EUR + 0.50 EUR",
        }
        return fixed[tref.name]

    # -- the mutation menu ------------------------------------------------------

    def pick_mutation(self, p: Project):
        """Returns a closure performing one random kernel mutation."""
        rng = self.rng
        ops = [self._op_create_class, self._op_add_attribute,
               self._op_instantiate, self._op_set_slot, self._op_set_slot,
               self._op_create_link, self._op_remove_link,
               self._op_create_enum, self._op_create_association,
               self._op_add_constraint, self._op_add_operation,
               self._op_set_generalization, self._op_remove_attribute,
               self._op_remove_object, self._op_delegation]
        return rng.choice(ops)(p)

    def _op_create_class(self, p):
        if len(p.classes) >= MAX_CLASSES:
            return None
        name = self.fresh("C")
        abstract = self.rng.random() < 0.15
        superclass = (self.rng.choice(list(p.classes))
                      if p.classes and self.rng.random() < 0.4 else None)
        return lambda p: kernel.create_class(p, name, abstract, superclass)

    def _op_add_attribute(self, p):
        if not p.classes:
            return None
        cls = self.rng.choice(list(p.classes.values()))
        name = self.fresh("attr")
        tref = self.random_typeref(p)
        if self.rng.random() < 0.15:
            derivation = self.derivation_for(p, cls, tref)
            if derivation is not None:
                return lambda p: kernel.add_attribute(
                    p, cls.id, name, tref, derived=True,
                    derivation=derivation)
        return lambda p: kernel.add_attribute(p, cls.id, name, tref)

    def _op_instantiate(self, p):
        pool = [c for c in p.classes.values() if not c.abstract]
        if not pool or len(p.objects) >= MAX_OBJECTS:
            return None
        cls = self.rng.choice(pool)
        name = self.fresh("obj")
        return lambda p: kernel.instantiate(p, cls.id, name)

    def _op_set_slot(self, p):
        candidates = []
        for obj in p.objects.values():
            for attr in p.effective_attributes(obj.class_id):
                if not attr.derived:
                    candidates.append((obj, attr))
        if not candidates:
            return None
        obj, attr = self.rng.choice(candidates)
        if self.rng.random() < 0.15:
            return lambda p: kernel.set_slot(p, obj.id, attr.name, kernel.CLEAR)
        value = self.random_value(p, attr.type)
        if value is None:
            return None
        return lambda p: kernel.set_slot(p, obj.id, attr.name, value)

    def _op_create_link(self, p):
        if not p.associations:
            return None
        assoc = self.rng.choice(list(p.associations.values()))
        pool1 = p.instances_of(assoc.ends[0].class_id)
        pool2 = p.instances_of(assoc.ends[1].class_id)
        if not pool1 or not pool2:
            return None
        o1 = self.rng.choice(pool1)
        o2 = self.rng.choice(pool2)
        return lambda p: kernel.create_link(p, assoc.id, o1.id, o2.id)

    def _op_remove_link(self, p):
        if not p.links:
            return None
        link_id = self.rng.choice(list(p.links))
        return lambda p: kernel.remove_link(p, link_id)

    def _op_create_enum(self, p):
        if len(p.enumerations) >= 3:
            return None
        name = self.fresh("Enum")
        literals = [self.fresh("Lit") for _ in range(self.rng.randint(2, 4))]
        return lambda p: kernel.create_enumeration(p, name, literals)

    def _op_create_association(self, p):
        if not p.classes or len(p.associations) >= 4:
            return None
        c1 = self.rng.choice(list(p.classes))
        c2 = self.rng.choice(list(p.classes))
        name = self.fresh("Rel")
        r1, r2 = self.fresh("role"), self.fresh("role")
        m1 = self.rng.choice(MULT_MENU)
        m2 = self.rng.choice(MULT_MENU)
        return lambda p: kernel.create_association(p, name, (c1, r1, m1),
                                                   (c2, r2, m2))

    def _op_add_constraint(self, p):
        targets = []
        for cls in p.classes.values():
            for attr in p.effective_attributes(cls.id):
                if attr.type.kind == "datatype" and \
                        attr.type.name in ("Integer", "MonetaryValue"):
                    targets.append((cls, attr))
        if not targets:
            return None
        cls, attr = self.rng.choice(targets)
        name = self.fresh("con")
        if attr.type.name == "Integer":
            body = f"self.{attr.name} > 0"
        else:
            body = f"self.{attr.name}.amount() > 0"
        message = f"'{name}: ' + self.{attr.name}.toString()"
        return lambda p: kernel.add_constraint(p, cls.id, name, body, message)

    def _op_add_operation(self, p):
        if not p.classes:
            return None
        cls = self.rng.choice(list(p.classes.values()))
        name = self.fresh("op")
        monitored = self.rng.random() < 0.5
        numeric = [a for a in p.effective_attributes(cls.id)
                   if a.type.kind == "datatype" and a.type.name == "Integer"]
        if numeric and self.rng.random() < 0.6:
            body = f"self.{self.rng.choice(numeric).name} + 1"
        else:
            body = "40 + 2"
        return lambda p: kernel.add_operation(
            p, cls.id, name, [], TypeRef.datatype("Integer"), body,
            monitored=monitored)

    def _op_set_generalization(self, p):
        if len(p.classes) < 2:
            return None
        sub = self.rng.choice(list(p.classes))
        if self.rng.random() < 0.2:
            return lambda p: kernel.set_generalization(p, sub, None)
        superclass = self.rng.choice(list(p.classes))
        return lambda p: kernel.set_generalization(p, sub, superclass)

    def _op_remove_attribute(self, p):
        pool = [a for cls in p.classes.values() for a in cls.attributes]
        if not pool or self.rng.random() < 0.5:
            return None
        attr = self.rng.choice(pool)
        return lambda p: kernel.remove_attribute(p, attr.id)

    def _op_remove_object(self, p):
        if len(p.objects) <= 2 or self.rng.random() < 0.5:
            return None
        obj_id = self.rng.choice(list(p.objects))
        return lambda p: kernel.remove_object(p, obj_id)

    def _op_delegation(self, p):
        rng = self.rng
        bindable = []
        for obj in p.objects.values():
            for dele in p.effective_delegations(obj.class_id):
                pool = p.instances_of(dele.target)
                if pool:
                    bindable.append((obj, dele, rng.choice(pool)))
        if bindable and rng.random() < 0.6:
            obj, dele, target = rng.choice(bindable)
            return lambda p: kernel.set_delegate(p, obj.id, dele.name,
                                                 target.id)
        if len(p.classes) < 2:
            return None
        cls = rng.choice(list(p.classes))
        target = rng.choice(list(p.classes))
        name = self.fresh("del")
        return lambda p: kernel.declare_delegation(p, cls, name, target)

    # -- sequence runner -----------------------------------------------------

    def run_mutations(self, p: Project, apply, wanted: int,
                      max_attempts: int = 60) -> int:
        """Drive ``wanted`` successful mutations through ``apply(closure)``;
        kernel rejections are skipped. Returns the success count."""
        done = 0
        attempts = 0
        while done < wanted and attempts < max_attempts:
            attempts += 1
            closure = self.pick_mutation(p)
            if closure is None:
                continue
            try:
                apply(closure)
            except ModelError:
                continue
            done += 1
        return done


def oracle_effective_attribute_ids(p: Project, class_id: str) -> set:
    """Independent effective-attribute computation: a plain superclass walk
    that shares no code with the kernel's flattening helper."""
    ids = set()
    cur = class_id
    seen = set()
    while cur is not None and cur not in seen:
        seen.add(cur)
        cls = p.classes[cur]
        ids.update(a.id for a in cls.attributes)
        cur = cls.superclass
    return ids
