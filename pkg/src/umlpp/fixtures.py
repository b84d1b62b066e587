"""Bundled example projects.

``build_cinema`` is the canonical demo: a small cinema domain whose object
``ticket2`` carries a deliberately violating price, so the report machinery
has something to show the moment the file opens. ``build_staffing``
demonstrates delegation: precedence of own features, multi-hop resolution
and receiver-bound ``self``.

The JSON files under ``data/`` are the saved canonical form of these
builders; a test keeps them in sync.
"""

from __future__ import annotations

from datetime import date
from decimal import Decimal

from umlpp import kernel
from umlpp.model import DiagramLayout, DiagramNode, Multiplicity, Project, TypeRef
from umlpp.values import EnumValue, Money


def build_cinema() -> tuple[Project, list[DiagramLayout]]:
    p = Project("cinema")
    genre = kernel.create_enumeration(p, "Genre", ["Horror", "Comedy", "Drama"])
    movie = kernel.create_class(p, "Movie")
    kernel.add_attribute(p, movie.id, "title", TypeRef.datatype("String"))
    kernel.add_attribute(p, movie.id, "genre", TypeRef.enumeration(genre.id))
    screening = kernel.create_class(p, "Screening")
    kernel.add_attribute(p, screening.id, "start", TypeRef.datatype("Date"))
    kernel.add_attribute(p, screening.id, "seatsLeft",
                         TypeRef.datatype("Integer"))
    ticket = kernel.create_class(p, "Ticket")
    kernel.add_attribute(p, ticket.id, "price",
                         TypeRef.datatype("MonetaryValue"))
    kernel.add_operation(p, ticket.id, "total", [],
                         TypeRef.datatype("MonetaryValue"), "self.price",
                         monitored=True)
    kernel.add_constraint(
        p, ticket.id, "positivePrice",
        "self.price.amount() > 0",
        "'price must be positive, got ' + self.price.toString()")
    kernel.create_association(
        p, "Shows",
        (screening.id, "screenings", Multiplicity(0, None)),
        (movie.id, "movie", Multiplicity(1, 1)))
    kernel.create_association(
        p, "Admits",
        (ticket.id, "tickets", Multiplicity(0, None)),
        (screening.id, "screening", Multiplicity(1, 1)))

    movie1 = kernel.instantiate(p, movie.id, "movie1")
    kernel.set_slot(p, movie1.id, "title", "Night of the Shapes")
    kernel.set_slot(p, movie1.id, "genre", EnumValue(genre.id, "Horror"))
    screening1 = kernel.instantiate(p, screening.id, "screening1")
    kernel.set_slot(p, screening1.id, "start", date(2026, 1, 15))
    kernel.set_slot(p, screening1.id, "seatsLeft", 42)
    ticket1 = kernel.instantiate(p, ticket.id, "ticket1")
    kernel.set_slot(p, ticket1.id, "price", Money(Decimal("12.50"), "EUR"))
    ticket2 = kernel.instantiate(p, ticket.id, "ticket2")
    kernel.set_slot(p, ticket2.id, "price", Money(Decimal("0.00"), "EUR"))

    shows = next(a for a in p.associations.values() if a.name == "Shows")
    admits = next(a for a in p.associations.values() if a.name == "Admits")
    kernel.create_link(p, shows.id, screening1.id, movie1.id)
    kernel.create_link(p, admits.id, ticket1.id, screening1.id)
    kernel.create_link(p, admits.id, ticket2.id, screening1.id)

    layout = DiagramLayout("main", [
        DiagramNode(movie.id, 80, 60),
        DiagramNode(screening.id, 360, 60),
        DiagramNode(ticket.id, 640, 60),
        DiagramNode(movie1.id, 80, 320),
        DiagramNode(screening1.id, 360, 320),
        DiagramNode(ticket1.id, 640, 320),
        DiagramNode(ticket2.id, 640, 480),
    ])
    return p, [layout]


def build_staffing() -> tuple[Project, list[DiagramLayout]]:
    """Delegation playground: an Employee delegates to a Person, the office
    chain goes two hops deep, and both receiver and delegate carry a
    ``label`` so self-binding is observable."""
    p = Project("staffing")
    person = kernel.create_class(p, "Person")
    kernel.add_attribute(p, person.id, "name", TypeRef.datatype("String"))
    kernel.add_attribute(p, person.id, "label", TypeRef.datatype("String"))
    kernel.add_operation(p, person.id, "describe", [],
                         TypeRef.datatype("String"), "'I am ' + self.label")
    employee = kernel.create_class(p, "Employee")
    kernel.add_attribute(p, employee.id, "label", TypeRef.datatype("String"))
    kernel.add_attribute(p, employee.id, "salary",
                         TypeRef.datatype("MonetaryValue"))
    kernel.declare_delegation(p, employee.id, "base", person.id)

    city = kernel.create_class(p, "City")
    kernel.add_attribute(p, city.id, "zone", TypeRef.datatype("Integer"))
    office = kernel.create_class(p, "Office")
    kernel.declare_delegation(p, office.id, "location", city.id)
    worker = kernel.create_class(p, "Worker")
    kernel.declare_delegation(p, worker.id, "office", office.id)

    person1 = kernel.instantiate(p, person.id, "person1")
    kernel.set_slot(p, person1.id, "name", "Alex")
    kernel.set_slot(p, person1.id, "label", "the person")
    employee1 = kernel.instantiate(p, employee.id, "employee1")
    kernel.set_slot(p, employee1.id, "label", "the employee")
    kernel.set_slot(p, employee1.id, "salary", Money(Decimal("3000.00"), "EUR"))
    kernel.set_delegate(p, employee1.id, "base", person1.id)

    city1 = kernel.instantiate(p, city.id, "city1")
    kernel.set_slot(p, city1.id, "zone", 7)
    office1 = kernel.instantiate(p, office.id, "office1")
    kernel.set_delegate(p, office1.id, "location", city1.id)
    worker1 = kernel.instantiate(p, worker.id, "worker1")
    kernel.set_delegate(p, worker1.id, "office", office1.id)

    layout = DiagramLayout("main", [
        DiagramNode(person.id, 80, 60),
        DiagramNode(employee.id, 360, 60),
        DiagramNode(person1.id, 80, 300),
        DiagramNode(employee1.id, 360, 300),
    ])
    return p, [layout]
