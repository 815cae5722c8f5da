from django.apps import AppConfig


class AdiabaticConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'adiabatic'
