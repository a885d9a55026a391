"""Rede de política/valor e diferenciação automática."""
