from django.apps import AppConfig


class FockConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'fock'
