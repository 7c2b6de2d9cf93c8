"""Structural similarity: dependency/graph parsing, tree edit distance, graph F1."""

from .conllu import ConlluError, DependencyTree, Token, parse_conllu, parse_conllu_file
from .convert import dep_to_amr_style
from .penman import PenmanError, SemanticGraph, parse_penman, parse_penman_file, serialize_penman
from .smatch import SmatchResult, smatch
from .ted import OrderedTree, TedResult, ted, tree_edit_distance, tree_from_dependency

__all__ = [
    "ConlluError",
    "DependencyTree",
    "Token",
    "parse_conllu",
    "parse_conllu_file",
    "dep_to_amr_style",
    "PenmanError",
    "SemanticGraph",
    "parse_penman",
    "parse_penman_file",
    "serialize_penman",
    "SmatchResult",
    "smatch",
    "OrderedTree",
    "TedResult",
    "ted",
    "tree_edit_distance",
    "tree_from_dependency",
]
