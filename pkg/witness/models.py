from django.db import models


class RunRecord(models.Model):
    command = models.CharField(max_length=40)
    config = models.JSONField()
    report = models.JSONField()
    version = models.CharField(max_length=20)
    runtime_seconds = models.FloatField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        get_latest_by = 'created_at'
        ordering = ['-created_at']

    def __str__(self):
        # Command name with its timestamp for admin and shell listings
        return f"{self.command} run @ {self.created_at}"
