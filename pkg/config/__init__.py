"""Init file"""
