import json
from decimal import Decimal

import pytest

from umlpp import document, engine, fixtures, kernel
from umlpp.errors import LoadError
from umlpp.model import Multiplicity, Project, TypeRef
from umlpp.values import Money


def test_cinema_fixture_loads_with_violation(cinema_with_layouts):
    project, layouts = cinema_with_layouts
    data = document.save(project, layouts)
    loaded, loaded_layouts = document.load(data)
    report, _ = engine.full_report(loaded)
    violated = [v for v in report.entries if v.status == "violated"]
    assert len(violated) == 1
    assert violated[0].message == "price must be positive, got 0.00 EUR"
    assert len(loaded_layouts) == 1
    assert len(loaded_layouts[0].nodes) == 7


def test_unsupported_version_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    data["formatVersion"] = 2
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "schema"
    assert exc.value.pointer == "/formatVersion"


def test_link_to_missing_object_is_reference_error(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    data["links"][0]["end1"] = "nope"
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "reference"
    assert exc.value.pointer == "/links/0/end1"


def test_syntax_error(cinema_with_layouts):
    with pytest.raises(LoadError) as exc:
        document.load(b"{ not json")
    assert exc.value.kind == "syntax"


def test_unknown_top_level_key_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    data["extra"] = 1
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "schema"


def test_orphan_slot_in_file_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    data["objects"][0]["slots"]["ghost"] = {"state": "unset"}
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "reference"
    assert "ghost" in exc.value.pointer


def test_wrong_value_type_in_file_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    # ticket1 price gets an integer value
    ticket1 = next(o for o in data["objects"] if o["name"] == "ticket1")
    ticket1["slots"]["price"] = {"state": "entered",
                                 "value": {"kind": "integer", "v": 5}}
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "invariant"


def test_bad_expression_in_file_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    ticket = next(c for c in data["classes"] if c["name"] == "Ticket")
    ticket["constraints"][0]["body"] = "self.price +"
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "expression"
    assert "/constraints/0/body" in exc.value.pointer


def test_namespace_clash_in_file_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    data["objects"][0]["name"] = "Ticket"
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "invariant"


def test_duplicate_link_in_file_rejected(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    dup = dict(data["links"][0])
    dup["id"] = "dupLink"
    data["links"].append(dup)
    with pytest.raises(LoadError) as exc:
        document.load(json.dumps(data).encode())
    assert exc.value.kind == "invariant"


def test_roundtrip_is_identity(cinema_with_layouts):
    data = document.save(*cinema_with_layouts)
    loaded = document.load(data)
    assert document.save(*loaded) == data
    again = document.load(document.save(*loaded))
    assert document.save(*again) == data


def test_semantically_equal_models_serialize_identically():
    a = fixtures.build_cinema()
    b = fixtures.build_cinema()
    assert document.save(*a) == document.save(*b)


def test_canonical_shape(cinema_with_layouts):
    data = document.save(*cinema_with_layouts)
    assert data.endswith(b"\n")
    assert b"\r" not in data
    doc = json.loads(data)
    assert list(doc) == ["formatVersion", "projectName", "enumerations",
                         "classes", "associations", "objects", "links",
                         "diagrams"]
    cls = doc["classes"][0]
    assert list(cls) == ["id", "name", "abstract", "superclass",
                         "delegations", "attributes", "operations",
                         "constraints"]
    obj = doc["objects"][0]
    assert list(obj) == ["id", "name", "class", "slots", "delegates"]


def test_monetary_serializes_as_decimal_string(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    ticket1 = next(o for o in data["objects"] if o["name"] == "ticket1")
    assert ticket1["slots"]["price"]["value"] == {
        "kind": "monetary", "amount": "12.50", "currency": "EUR"}


def test_monetary_fidelity_through_documents():
    p = Project("money")
    cls = kernel.create_class(p, "Wallet")
    kernel.add_attribute(p, cls.id, "cash", TypeRef.datatype("MonetaryValue"))
    obj = kernel.instantiate(p, cls.id, "w1")
    for raw in ("0.0001", "12.50", "99999999.9999", "0.10", "5"):
        kernel.set_slot(p, obj.id, "cash", Money(Decimal(raw), "JPY"))
        loaded, _ = document.load(document.save(p, []))
        slot = next(iter(loaded.object_by_name("w1").slots.values()))
        assert slot.value.amount_str == raw
        assert slot.value.currency == "JPY"


def test_multiplicity_notation_roundtrip():
    p = Project("t")
    a = kernel.create_class(p, "A")
    b = kernel.create_class(p, "B")
    kernel.create_association(p, "R1", (a.id, "x1", Multiplicity(0, None)),
                              (b.id, "y1", Multiplicity(1, 1)))
    kernel.create_association(p, "R2", (a.id, "x2", Multiplicity(2, 5)),
                              (b.id, "y2", Multiplicity(1, None)))
    data = json.loads(document.save(p, []))
    mults = [end["multiplicity"]
             for assoc in data["associations"] for end in assoc["ends"]]
    assert mults == ["*", "1", "2..5", "1..*"]
    loaded, _ = document.load(document.save(p, []))
    assert document.save(loaded, []) == document.save(p, [])


def test_computed_slots_restored_on_load(cinema_with_layouts):
    project, layouts = cinema_with_layouts
    ticket = project.class_by_name("Ticket")
    kernel.add_attribute(project, ticket.id, "cost",
                         TypeRef.datatype("MonetaryValue"),
                         derived=True, derivation="self.price")
    engine.recompute_derived(project)
    loaded, _ = document.load(document.save(project, layouts))
    t1 = loaded.object_by_name("ticket1")
    cost = loaded.find_effective_attribute(t1.class_id, "cost")
    assert t1.slots[cost.id].state == "computed"
    assert t1.slots[cost.id].value == Money(Decimal("12.50"), "EUR")


def test_id_counter_reseeded_after_load(cinema_with_layouts):
    loaded, _ = document.load(document.save(*cinema_with_layouts))
    existing = set(loaded.all_element_ids())
    cls = kernel.create_class(loaded, "Fresh")
    assert cls.id not in existing - {cls.id}
    assert cls.id not in existing or cls.id == max(existing)


# -- report export -------------------------------------------------------------

def test_export_report_text(cinema):
    engine.recompute_derived(cinema)
    report, _ = engine.full_report(cinema)
    text = document.export_report(report, "text", project=cinema).decode()
    lines = text.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("VIOLATED ticket2 constraint positivePrice:")
    assert "price must be positive, got 0.00 EUR" in lines[0]


def test_export_empty_report():
    report, _ = engine.full_report(Project("empty"))
    assert document.export_report(report, "text") == b""


def test_export_report_json_roundtrip(cinema):
    engine.recompute_derived(cinema)
    report, _ = engine.full_report(cinema)
    blob = document.export_report(report, "json")
    parsed = document.report_from_json(json.loads(blob))
    assert parsed == report


def test_not_evaluable_line_format(cinema):
    kernel.instantiate(cinema, cinema.class_by_name("Ticket").id, "t3")
    engine.recompute_derived(cinema)
    report, _ = engine.full_report(cinema)
    text = document.export_report(report, "text", project=cinema).decode()
    assert any(line.startswith("NOT-EVALUABLE t3")
               for line in text.splitlines())


def test_hand_written_sources_canonicalize_on_load(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    ticket = next(c for c in data["classes"] if c["name"] == "Ticket")
    ticket["constraints"][0]["body"] = "self.price.amount()>0"
    loaded, layouts = document.load(json.dumps(data).encode())
    cls = loaded.class_by_name("Ticket")
    assert cls.constraints[0].body_src == "self.price.amount() > 0"
    # the canonical form is a fixed point of save/load
    canonical = document.save(loaded, layouts)
    again, layouts2 = document.load(canonical)
    assert document.save(again, layouts2) == canonical


def test_classes_load_in_any_order(cinema_with_layouts):
    data = json.loads(document.save(*cinema_with_layouts))
    base = {"id": "zBase", "name": "Base", "abstract": False,
            "superclass": None, "delegations": [], "attributes": [],
            "operations": [], "constraints": []}
    sub = dict(base, id="zSub", name="Sub", superclass="zBase")
    data["classes"] = [sub] + data["classes"] + [base]  # subclass first
    loaded, _ = document.load(json.dumps(data).encode())
    assert loaded.class_by_name("Sub").superclass == "zBase"
