import importlib
import sys
from unittest import mock

from django.conf import settings
from django.test import SimpleTestCase


class TestProjectPackage(SimpleTestCase):
    def test_loads_without_database_driver(self):
        """Test that the project package imports when no database driver is installed"""
        with mock.patch.dict(sys.modules, {"pymysql": None, "MySQLdb": None}):
            module = importlib.reload(importlib.import_module("core"))
        self.assertEqual(module.__name__, "core")

    def test_no_database_configured(self):
        """Test that the project runs without any database"""
        self.assertEqual(settings.DATABASES.get("default", {}).get("ENGINE", "django.db.backends.dummy"),
                         "django.db.backends.dummy")
        self.assertEqual(settings.INSTALLED_APPS, ["paco"])
