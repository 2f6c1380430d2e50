void spin(int n)
{
    int i;
    #pragma acc parallel loop
    for (i = 0; i < n; i++);

    #pragma acc parallel loop
    for (i = 0; i < n; i++) {;}
}
