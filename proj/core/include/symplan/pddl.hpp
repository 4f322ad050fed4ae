#pragma once

#include <string>

#include "symplan/strips.hpp"

namespace symplan {

// Typed STRIPS subset: :strips + :typing, no conditional effects, no numeric
// fluents, no negative preconditions. Identifiers are case-insensitive and
// stored lower-case. Throws ParseError (with line/col) on malformed input,
// unsupported requirements, and undeclared predicates/objects/types.
Problem parse_pddl(const std::string& domain_text, const std::string& problem_text);

}  // namespace symplan
